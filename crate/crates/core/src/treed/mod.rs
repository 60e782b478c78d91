//! Treed power circuits.
//!
//! A treed circuit is a reduced circuit whose successor markings and whose
//! registered markings over the reduced part are kept *compact* chain by
//! chain and stored as leaves of a [`MarkTree`].  Lexicographic order of
//! tree paths then coincides with value order, so a new node is placed by
//! one descent of the tree instead of a binary search with comparisons.
//!
//! Two further invariants make the amortized analysis work:
//!
//! * the top node of every maximal chain is referenced by no marking and no
//!   edge, which leaves headroom for carries and compaction;
//! * the potential `ch(Π)·|Γ|` (number of maximal chains times size) pays
//!   for the occasional expensive prolongation of a chain.

mod tree;

use std::collections::HashMap;
use std::ops::Deref;

use crate::circuit::{q_ary_digits, Digit, Digits, Marking, NodeId, PowerCircuit};
use crate::compact::{compactify, PowerSum};
use crate::error::{Error, Result};
use crate::reduce::{ExtendReport, ReducedCircuit};

pub use tree::{MarkTree, Owner};
use tree::Located;

/// Counters reported by one run of [`TreedCircuit::extend_tree`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TreeReport {
    /// `|U|`, the number of pending nodes absorbed.
    pub pending: usize,
    /// Nodes added while absorbing pending nodes.
    pub growth: usize,
    /// `ch` before and after absorbing.
    pub chains_before: usize,
    pub chains_after: usize,
    /// Registered markings compacted and stored afterwards.
    pub compacted: usize,
    /// Nodes added while compacting them.
    pub compaction_growth: usize,
    /// `ch` after compacting.
    pub chains_final: usize,
    pub collisions: usize,
    pub prolongations: usize,
    pub carries: u64,
}

impl TreeReport {
    /// The growth allowance `4|U| + ch - ch'` of the absorbing phase
    /// (saturating at zero).
    pub fn allowance(&self) -> usize {
        (4 * self.pending + self.chains_before).saturating_sub(self.chains_after)
    }

    /// Nodes added in total.
    pub fn total_growth(&self) -> usize {
        self.growth + self.compaction_growth
    }

    /// The allowance for the whole run: `4|U|` for absorbing, one node per
    /// compacted marking, plus the overall drop in the number of chains.
    pub fn total_allowance(&self) -> usize {
        (4 * self.pending + self.compacted + self.chains_before).saturating_sub(self.chains_final)
    }
}

/// A reduced circuit with compact markings stored in a marking tree.
#[derive(Debug, Clone)]
pub struct TreedCircuit {
    rc: ReducedCircuit,
    tree: MarkTree,
    slot_leaf: HashMap<u32, u32>,
    node_leaf: HashMap<NodeId, u32>,
    prolongations: usize,
}

impl Deref for TreedCircuit {
    type Target = ReducedCircuit;

    fn deref(&self) -> &ReducedCircuit {
        &self.rc
    }
}

impl TreedCircuit {
    pub fn new(q: i64) -> Result<Self> {
        let rc = ReducedCircuit::new(q)?;
        let tree = MarkTree::new(rc.q());
        Ok(TreedCircuit {
            rc,
            tree,
            slot_leaf: HashMap::new(),
            node_leaf: HashMap::new(),
            prolongations: 0,
        })
    }

    /// Builds a treed circuit from an arbitrary power circuit (all nodes
    /// start out pending).  Registered markings of `pc` stay registered.
    pub fn make_tree(pc: PowerCircuit) -> Result<(Self, TreeReport)> {
        let rc = ReducedCircuit::wrap(pc);
        let tree = MarkTree::new(rc.q());
        let mut t = TreedCircuit {
            rc,
            tree,
            slot_leaf: HashMap::new(),
            node_leaf: HashMap::new(),
            prolongations: 0,
        };
        let report = t.extend_tree()?;
        Ok((t, report))
    }

    pub fn reduced(&self) -> &ReducedCircuit {
        &self.rc
    }

    pub fn tree(&self) -> &MarkTree {
        &self.tree
    }

    pub fn into_reduced(self) -> ReducedCircuit {
        self.rc
    }

    /// `ch(Π)`.
    pub fn chain_count(&self) -> usize {
        self.rc.chain_count()
    }

    /// The potential `ch(Π)·|Γ|`.
    pub fn potential(&self) -> u64 {
        (self.rc.chain_count() * self.rc.order.len()) as u64
    }

    /// Elementary steps spent so far (graph, marking and tree operations).
    pub fn steps(&self) -> u64 {
        self.rc.work() + self.tree.work
    }

    // -----------------------------------------------------------------------
    // Helpers on digit vectors
    // -----------------------------------------------------------------------

    fn n(&self) -> usize {
        self.rc.order.len()
    }

    fn in_gamma(&self, d: &Digits) -> bool {
        d.keys().all(|&u| self.rc.position(u).is_some())
    }

    /// Digits as a top-down path over all levels.
    fn path(&self, d: &Digits) -> Vec<Digit> {
        let n = self.n();
        let mut out = vec![0; n];
        for (&u, &x) in d {
            let p = self.rc.position(u).expect("support in the reduced part");
            out[n - 1 - p] = x;
        }
        out
    }

    /// `(position, digit)` pairs in ascending position order.
    fn positioned(&self, d: &Digits) -> Vec<(usize, Digit)> {
        let mut v: Vec<(usize, Digit)> = d
            .iter()
            .map(|(&u, &x)| (self.rc.position(u).expect("support in the reduced part"), x))
            .collect();
        v.sort_unstable();
        v
    }

    /// Compactness on every maximal chain.
    pub fn is_compact_digits(&self, d: &Digits) -> bool {
        let top = self.rc.base().max_digit();
        let v = self.positioned(d);
        v.windows(2).all(|w| {
            let ((p, a), (r, b)) = (w[0], w[1]);
            if r != p + 1 || !self.rc.bits[p] {
                return true;
            }
            a.signum() * b.signum() != -1 && !(a > 0 && b == top) && !(a < 0 && b == -top)
        })
    }

    /// The chain-by-chain compact form.  No chain top may carry a digit.
    fn compact_digits(&mut self, d: &Digits) -> Digits {
        let base = self.rc.base();
        let v = self.positioned(d);
        let mut out = Digits::new();
        let mut i = 0;
        while i < v.len() {
            let chain = self.rc.chain_at(v[i].0);
            let len = chain.len();
            let mut dense = vec![0; len - 1];
            while i < v.len() && v[i].0 <= chain.end {
                let (p, x) = v[i];
                assert!(p < chain.end, "marking carries a digit at a chain top");
                dense[p - chain.start] = x;
                i += 1;
            }
            self.rc.pc.charge(len);
            let c = compactify(&PowerSum::from_digits(base, dense));
            for (k, &x) in c.coeffs().iter().enumerate() {
                if x != 0 {
                    assert!(k < len, "compact form exceeds its chain");
                    out.insert(self.rc.order[chain.start + k], x);
                }
            }
        }
        out
    }

    // -----------------------------------------------------------------------
    // Tree registration
    // -----------------------------------------------------------------------

    fn register_slot(&mut self, slot: u32) {
        debug_assert!(!self.slot_leaf.contains_key(&slot));
        let path = self.path(self.rc.pc.slot_digits_raw(slot));
        let leaf = self.tree.insert(&path, Owner::Marking(slot));
        self.slot_leaf.insert(slot, leaf);
    }

    fn unregister_slot(&mut self, slot: u32) {
        if let Some(leaf) = self.slot_leaf.remove(&slot) {
            self.tree.remove(leaf, Owner::Marking(slot));
        }
    }

    fn register_node(&mut self, u: NodeId) {
        let path = self.path(&self.rc.pc.node(u).expect("live").succ);
        let leaf = self.tree.insert(&path, Owner::Node(u));
        self.node_leaf.insert(u, leaf);
    }

    fn apply_moves(&mut self, moved: Vec<(Owner, u32)>) {
        for (o, leaf) in moved {
            match o {
                Owner::Node(u) => {
                    self.node_leaf.insert(u, leaf);
                }
                Owner::Marking(s) => {
                    self.slot_leaf.insert(s, leaf);
                }
            }
        }
    }

    /// Overwrites the digits of a registered marking.
    fn set_slot_digits(&mut self, slot: u32, new: &Digits) {
        let old: Vec<NodeId> = self.rc.pc.slot_digits_raw(slot).keys().copied().collect();
        for u in old {
            if !new.contains_key(&u) {
                self.rc.pc.set_mark_digit(slot, u, 0);
            }
        }
        for (&u, &d) in new {
            if self.rc.pc.mark_digit(slot, u) != d {
                self.rc.pc.set_mark_digit(slot, u, d);
            }
        }
    }

    /// Overwrites the successor marking of a pending node.
    fn set_succ_digits(&mut self, w: NodeId, new: &Digits) {
        let old: Vec<NodeId> = self.rc.pc.node(w).expect("live").succ.keys().copied().collect();
        for u in old {
            if !new.contains_key(&u) {
                self.rc.pc.set_edge(w, u, 0);
            }
        }
        for (&u, &d) in new {
            if self.rc.pc.edge(w, u) != d {
                self.rc.pc.set_edge(w, u, d);
            }
        }
    }

    // -----------------------------------------------------------------------
    // Node insertion and chain maintenance
    // -----------------------------------------------------------------------

    /// Locates compact digits among the successor markings: the position
    /// where a node with this successor marking belongs, and whether one
    /// already exists.
    fn locate(&mut self, d: &Digits) -> (usize, Option<NodeId>) {
        let path = self.path(d);
        match self.tree.locate(&path) {
            Located::Equal(v) => (self.rc.position(v).expect("reduced"), Some(v)),
            Located::Before(v) => (self.rc.position(v).expect("reduced"), None),
            Located::End => (self.n(), None),
        }
    }

    /// Tree-determined insertion position of compact digits (for
    /// cross-checking against binary search).
    pub fn tree_position(&mut self, d: &Digits) -> Result<(usize, bool)> {
        if !self.in_gamma(d) {
            return Err(Error::NotReduced);
        }
        if !self.is_compact_digits(d) {
            return Err(Error::NotCompact);
        }
        let (j, eq) = self.locate(d);
        Ok((j, eq.is_some()))
    }

    /// Puts `u` at list position `j`, stretches the tree by one level and
    /// stores `Λ_u` as a leaf.
    fn place(&mut self, u: NodeId, j: usize) {
        let depth = self.n() - j;
        self.rc.insert_at(j, u);
        let moved = self.tree.insert_level(depth);
        self.apply_moves(moved);
        self.register_node(u);
    }

    /// InsNode for a node whose successor marking is compact over `Γ`.
    fn ins_node(&mut self, u: NodeId) -> Result<()> {
        let lambda = self.rc.pc.node(u)?.succ.clone();
        let (j, eq) = self.locate(&lambda);
        if let Some(v) = eq {
            return Err(Error::DuplicateValue(v));
        }
        self.place(u, j);
        Ok(())
    }

    /// Whether the node at `p` is referenced by an edge from a reduced node
    /// or by a registered marking stored in the tree.  Other markings get
    /// their headroom right before they are compacted.
    fn referenced(&self, p: usize) -> bool {
        let n = self.rc.pc.node(self.rc.order[p]).expect("live");
        n.preds.iter().any(|&w| self.rc.position(w).is_some())
            || n.marks.iter().any(|s| self.slot_leaf.contains_key(s))
    }

    /// Prolongs every chain whose top carries a digit of `d`.
    fn free_tops_of(&mut self, d: impl Fn(&Self) -> Digits) {
        loop {
            let cur = d(self);
            let n = self.n();
            let bad = cur
                .keys()
                .map(|&u| self.rc.position(u).expect("reduced"))
                .find(|&p| p + 1 == n || !self.rc.bits[p]);
            match bad {
                Some(p) => self.prolong(p),
                None => return,
            }
        }
    }

    /// Prolongs the base chain by the node of value `q^L`, `L` the current
    /// base-chain length, with a compact successor marking.
    fn pbc(&mut self) {
        let l = self.rc.base_chain_len();
        let raw = q_ary_digits(l as u64, self.rc.q());
        let c = compactify(&PowerSum::from_digits(self.rc.base(), raw));
        let mut succ = Digits::new();
        for (k, &x) in c.coeffs().iter().enumerate() {
            if x != 0 {
                assert!(k < l, "base-chain marking exceeds the chain");
                succ.insert(self.rc.order[k], x);
            }
        }
        let u = self.rc.pc.push_node(succ);
        self.ins_node(u).expect("base chain is maximal");
        self.prolongations += 1;
    }

    /// Prolongs the base chain until its top is unreferenced, also by the
    /// (possibly unstored) marking in `extra`.
    fn fix_base_top(&mut self, extra: Option<u32>) {
        loop {
            if !self.rc.has_unit() {
                self.pbc();
                continue;
            }
            let top = self.rc.base_chain_len() - 1;
            let by_extra = extra.is_some_and(|s| self.rc.pc.mark_digit(s, self.rc.order[top]) != 0);
            if !by_extra && !self.referenced(top) {
                return;
            }
            self.pbc();
        }
    }

    /// Adds one to a registered marking over `Γ` along the base chain and
    /// restores compactness there; only the base-chain top is repaired.
    fn inc_inner(&mut self, slot: u32) {
        if !self.rc.has_unit() {
            self.fix_base_top(None);
        }
        self.unregister_slot(slot);
        let top = self.rc.base().max_digit();
        let len = self.rc.base_chain_len();
        let mut l = 0;
        loop {
            let b = self.rc.order[l];
            let d = self.rc.pc.mark_digit(slot, b);
            if d < top {
                self.rc.pc.set_mark_digit(slot, b, d + 1);
                break;
            }
            self.rc.pc.set_mark_digit(slot, b, 0);
            l += 1;
            assert!(l < len, "carry left the base chain");
        }
        self.fix_base_top(Some(slot));
        let cur = self.rc.pc.slot_digits_raw(slot).clone();
        let c = self.compact_digits(&cur);
        self.set_slot_digits(slot, &c);
        self.fix_base_top(Some(slot));
        self.register_slot(slot);
    }

    /// Adds a node of value `q·e(top)` above the chain whose top sits at
    /// position `p`.
    fn prolong(&mut self, p: usize) {
        if self.rc.has_unit() && self.rc.chain_at(p).start == 0 {
            self.pbc();
            return;
        }
        let t = self.rc.order[p];
        let lambda = self.rc.pc.node(t).expect("live").succ.clone();
        let m = self.rc.pc.register(lambda);
        let slot = m.slot;
        self.register_slot(slot);
        self.inc_inner(slot);
        let digits = self.rc.pc.slot_digits_raw(slot).clone();
        self.unregister_slot(slot);
        self.rc.pc.release(m).expect("live temporary");
        let (j, eq) = self.locate(&digits);
        if eq.is_none() {
            let v = self.rc.pc.push_node(digits);
            self.place(v, j);
            self.prolongations += 1;
        }
    }

    /// Prolongs chains until no chain top is referenced.
    fn fix_tops(&mut self) {
        loop {
            let n = self.n();
            let bad = (0..n).find(|&p| (p + 1 == n || !self.rc.bits[p]) && self.referenced(p));
            self.rc.pc.charge(n);
            match bad {
                Some(p) => self.prolong(p),
                None => return,
            }
        }
    }

    fn compact_slot(&mut self, slot: u32) {
        self.unregister_slot(slot);
        let cur = self.rc.pc.slot_digits_raw(slot).clone();
        if !self.is_compact_digits(&cur) {
            self.free_tops_of(|t| t.rc.pc.slot_digits_raw(slot).clone());
            let cur = self.rc.pc.slot_digits_raw(slot).clone();
            let c = self.compact_digits(&cur);
            self.set_slot_digits(slot, &c);
        }
        self.register_slot(slot);
    }

    fn compact_succ(&mut self, w: NodeId) {
        let cur = self.rc.pc.node(w).expect("live").succ.clone();
        if !self.is_compact_digits(&cur) {
            self.free_tops_of(|t| t.rc.pc.node(w).expect("live").succ.clone());
            let cur = self.rc.pc.node(w).expect("live").succ.clone();
            let c = self.compact_digits(&cur);
            self.set_succ_digits(w, &c);
        }
    }

    // -----------------------------------------------------------------------
    // ETree
    // -----------------------------------------------------------------------

    /// Absorbs all pending nodes, then compacts and stores every registered
    /// marking whose support lies in `Γ`.
    pub fn extend_tree(&mut self) -> Result<TreeReport> {
        let topo = self.rc.pending_order()?;
        let mut report = TreeReport {
            pending: topo.len(),
            chains_before: self.chain_count(),
            ..TreeReport::default()
        };
        let before = self.n();
        let prol_before = self.prolongations;
        for u in topo {
            self.absorb(u, &mut report)?;
        }
        report.growth = self.n() - before;
        report.chains_after = self.chain_count();
        let mid = self.n();
        let loose: Vec<u32> = self
            .rc
            .pc
            .live_slots()
            .filter(|s| !self.slot_leaf.contains_key(s))
            .collect();
        for s in loose {
            if self.in_gamma(self.rc.pc.slot_digits_raw(s)) {
                self.compact_slot(s);
                report.compacted += 1;
            }
        }
        self.fix_tops();
        report.compaction_growth = self.n() - mid;
        report.chains_final = self.chain_count();
        report.prolongations = self.prolongations - prol_before;
        Ok(report)
    }

    fn absorb(&mut self, u: NodeId, report: &mut TreeReport) -> Result<()> {
        if self.n() == 0 {
            if !self.rc.pc.node(u)?.succ.is_empty() {
                unreachable!("first absorbed node must be a leaf");
            }
            self.place(u, 0);
        } else {
            self.compact_succ(u);
            let lambda = self.rc.pc.node(u)?.succ.clone();
            if self.rc.sign_of_digits(&lambda)? < 0 {
                return Err(Error::NotAPowerCircuit(u));
            }
            let (j, eq) = self.locate(&lambda);
            match eq {
                None => self.place(u, j),
                Some(vj) => {
                    report.collisions += 1;
                    let k = self.rc.chain_top(j);
                    self.prolong(k);
                    let mut er = ExtendReport::default();
                    self.rc.replace_node(u, vj, &mut er);
                    report.carries += er.carries;
                }
            }
        }
        self.fix_tops();
        Ok(())
    }

    // -----------------------------------------------------------------------
    // Public marking operations
    // -----------------------------------------------------------------------

    fn slot(&self, m: &Marking) -> Result<u32> {
        self.rc.pc.slot_of(m)
    }

    /// Registers a marking; it is compacted and stored by the next
    /// [`TreedCircuit::extend_tree`].
    pub fn new_marking<I>(&mut self, digits: I) -> Result<Marking>
    where
        I: IntoIterator<Item = (NodeId, i64)>,
    {
        self.rc.pc.new_marking(digits)
    }

    pub fn release(&mut self, m: Marking) -> Result<Digits> {
        let s = self.slot(&m)?;
        self.unregister_slot(s);
        self.rc.pc.release(m)
    }

    /// A second marking with the same digits on the same nodes.
    pub fn duplicate(&mut self, m: &Marking) -> Result<Marking> {
        let s = self.slot(m)?;
        let d = self.rc.pc.slot_digits_raw(s).clone();
        let out = self.rc.pc.register(d);
        if self.slot_leaf.contains_key(&s) {
            self.register_slot(out.slot);
        }
        Ok(out)
    }

    pub fn clone_marking(&mut self, m: &Marking) -> Result<Marking> {
        self.rc.pc.clone_marking(m)
    }

    /// `e(K) + e(M)`, consuming both; call `extend_tree` afterwards.
    pub fn add_markings(&mut self, k: Marking, m: Marking) -> Result<Marking> {
        let (sk, sm) = (self.slot(&k)?, self.slot(&m)?);
        self.unregister_slot(sk);
        self.unregister_slot(sm);
        self.rc.pc.add_markings(k, m)
    }

    /// `e(K)·q^e(M)`, consuming both; call `extend_tree` afterwards.
    pub fn mult_by_power(&mut self, k: Marking, m: Marking) -> Result<Marking> {
        let (sk, sm) = (self.slot(&k)?, self.slot(&m)?);
        self.unregister_slot(sk);
        self.unregister_slot(sm);
        self.rc.pc.mult_by_power(k, m)
    }

    /// Negates in place (compactness is preserved by symmetry).
    pub fn negate(&mut self, m: &Marking) -> Result<()> {
        let s = self.slot(m)?;
        let stored = self.slot_leaf.contains_key(&s);
        self.unregister_slot(s);
        self.rc.pc.negate(m)?;
        if stored {
            self.register_slot(s);
        }
        Ok(())
    }

    /// A compact marking of value `n` on the base chain.
    pub fn const_marking(&mut self, n: i64) -> Result<Marking> {
        let raw = q_ary_digits(n.unsigned_abs(), self.rc.q());
        if !self.rc.has_unit() {
            self.fix_base_top(None);
        }
        while self.rc.base_chain_len() <= raw.len() {
            self.pbc();
        }
        let sign = if n < 0 { -1 } else { 1 };
        let map: Digits = raw
            .iter()
            .enumerate()
            .filter(|(_, &d)| d != 0)
            .map(|(l, &d)| (self.rc.order[l], sign * d))
            .collect();
        let c = self.compact_digits(&map);
        let m = self.rc.pc.register(c);
        self.register_slot(m.slot);
        self.fix_tops();
        Ok(m)
    }

    /// InsNode: creates a node whose successor marking copies the compact
    /// marking `m` and inserts it into the sorted list and the tree.
    pub fn insert_node(&mut self, m: &Marking) -> Result<NodeId> {
        let s = self.slot(m)?;
        let d = self.rc.pc.slot_digits_raw(s).clone();
        if !self.in_gamma(&d) {
            return Err(Error::NotReduced);
        }
        if !self.is_compact_digits(&d) {
            return Err(Error::NotCompact);
        }
        if self.rc.sign_of_digits(&d)? < 0 {
            return Err(Error::Validation("successor value must be non-negative".into()));
        }
        let (j, eq) = self.locate(&d);
        if let Some(v) = eq {
            return Err(Error::DuplicateValue(v));
        }
        let u = self.rc.pc.push_node(d);
        self.place(u, j);
        Ok(u)
    }

    /// CompMark: rewrites `m` into its compact form chain by chain.
    pub fn compactify_marking(&mut self, m: &Marking) -> Result<()> {
        let s = self.slot(m)?;
        if !self.in_gamma(self.rc.pc.slot_digits_raw(s)) {
            return Err(Error::NotReduced);
        }
        self.fix_tops();
        self.compact_slot(s);
        self.fix_tops();
        Ok(())
    }

    /// IncMark: adds one to the compact marking `m`.
    pub fn increment_marking(&mut self, m: &Marking) -> Result<()> {
        let s = self.slot(m)?;
        let d = self.rc.pc.slot_digits_raw(s);
        if !self.in_gamma(d) {
            return Err(Error::NotReduced);
        }
        if !self.is_compact_digits(d) {
            return Err(Error::NotCompact);
        }
        self.inc_inner(s);
        self.fix_tops();
        Ok(())
    }

    /// Whether marking `m` is stored in the tree.
    pub fn is_stored(&self, m: &Marking) -> bool {
        self.slot(m).is_ok_and(|s| self.slot_leaf.contains_key(&s))
    }

    // -----------------------------------------------------------------------
    // Invariants
    // -----------------------------------------------------------------------

    /// Checks the reduced-circuit invariants plus: every successor marking
    /// and every registered marking over `Γ` is compact and stored at the
    /// leaf spelling its digits, no chain top is referenced, and the tree
    /// is structurally sound.
    pub fn check_invariants(&self) -> Result<()> {
        self.rc.check_invariants()?;
        if !self.rc.pending().is_empty() {
            return Err(Error::Validation("pending nodes remain".into()));
        }
        self.tree.check().map_err(Error::Validation)?;
        if self.tree.depth() != self.n() {
            return Err(Error::Validation("tree depth differs from |Γ|".into()));
        }
        for &u in &self.rc.order {
            let succ = &self.rc.pc.node(u)?.succ;
            if !self.is_compact_digits(succ) {
                return Err(Error::Validation(format!("successor marking of {u} not compact")));
            }
            let leaf = *self
                .node_leaf
                .get(&u)
                .ok_or_else(|| Error::Validation(format!("{u} missing from tree")))?;
            if self.tree.path_of(leaf) != self.path(succ) || !self.tree.owners(leaf).contains(&Owner::Node(u)) {
                return Err(Error::Validation(format!("leaf of {u} is stale")));
            }
        }
        if self.node_leaf.len() != self.n() {
            return Err(Error::Validation("stale successor leaves".into()));
        }
        for s in self.rc.pc.live_slots() {
            let d = self.rc.pc.slot_digits_raw(s);
            if !self.in_gamma(d) {
                continue;
            }
            if !self.is_compact_digits(d) {
                return Err(Error::Validation(format!("marking slot {s} not compact")));
            }
            let leaf = *self
                .slot_leaf
                .get(&s)
                .ok_or_else(|| Error::Validation(format!("marking slot {s} missing from tree")))?;
            if self.tree.path_of(leaf) != self.path(d) {
                return Err(Error::Validation(format!("leaf of slot {s} is stale")));
            }
        }
        let n = self.n();
        for p in 0..n {
            if (p + 1 == n || !self.rc.bits[p]) && self.referenced(p) {
                return Err(Error::Validation(format!("chain top at position {p} is referenced")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::DEFAULT_MAX_BITS;
    use num_bigint::BigInt;

    /// The five-node example circuit over base 2 with the marking
    /// `M = -u3 + u1` of value -3.
    fn tree_example() -> (PowerCircuit, Marking, [NodeId; 5]) {
        let mut pc = PowerCircuit::new(2).unwrap();
        let u1 = pc.add_node([]).unwrap();
        let u2 = pc.add_node([(u1, 1)]).unwrap();
        let u3 = pc.add_node([(u2, 1)]).unwrap();
        let u4 = pc.add_node([(u1, -1), (u3, 1)]).unwrap();
        let u5 = pc.add_node([(u1, 1), (u3, 1)]).unwrap();
        let m = pc.new_marking([(u3, -1), (u1, 1)]).unwrap();
        (pc, m, [u1, u2, u3, u4, u5])
    }

    #[test]
    fn tree_example_leaves() {
        let (pc, m, u) = tree_example();
        let (t, report) = TreedCircuit::make_tree(pc).unwrap();
        t.check_invariants().unwrap();
        assert_eq!(report.growth, 5);
        assert_eq!(t.order(), &u[..]);
        assert_eq!(t.bits(), &[true, true, true, false]);
        let v = t.eval_marking(&m, DEFAULT_MAX_BITS).unwrap();
        assert_eq!(v, BigInt::from(-3));
        let s = m.slot;
        let leaves = t.tree().leaves();
        let expect: Vec<(Vec<Digit>, Vec<Owner>)> = vec![
            (vec![0, 0, -1, 0, 1], vec![Owner::Marking(s)]),
            (vec![0, 0, 0, 0, 0], vec![Owner::Node(u[0])]),
            (vec![0, 0, 0, 0, 1], vec![Owner::Node(u[1])]),
            (vec![0, 0, 0, 1, 0], vec![Owner::Node(u[2])]),
            (vec![0, 0, 1, 0, -1], vec![Owner::Node(u[3])]),
            (vec![0, 0, 1, 0, 1], vec![Owner::Node(u[4])]),
        ];
        assert_eq!(leaves, expect);
    }

    #[test]
    fn increment_and_compact() {
        let (pc, m, _) = tree_example();
        let (mut t, _) = TreedCircuit::make_tree(pc).unwrap();
        for expect in -2..=20 {
            t.increment_marking(&m).unwrap();
            t.check_invariants().unwrap();
            assert_eq!(t.eval_marking(&m, DEFAULT_MAX_BITS).unwrap(), BigInt::from(expect));
        }
    }

    #[test]
    fn const_markings_are_compact() {
        let mut t = TreedCircuit::new(3).unwrap();
        let ms: Vec<Marking> = (-40..=40).map(|n| t.const_marking(n).unwrap()).collect();
        t.check_invariants().unwrap();
        for (m, n) in ms.iter().zip(-40i64..) {
            assert_eq!(t.eval_marking(m, DEFAULT_MAX_BITS).unwrap(), BigInt::from(n));
        }
    }

    #[test]
    fn arithmetic_then_extend() {
        let mut t = TreedCircuit::new(2).unwrap();
        let a = t.const_marking(5).unwrap();
        let b = t.const_marking(7).unwrap();
        let c = t.mult_by_power(a, b).unwrap();
        let report = t.extend_tree().unwrap();
        t.check_invariants().unwrap();
        assert!(report.growth <= report.allowance());
        assert_eq!(t.eval_marking(&c, DEFAULT_MAX_BITS).unwrap(), BigInt::from(640));
        let d = t.const_marking(-640).unwrap();
        let z = t.add_markings(c, d).unwrap();
        t.extend_tree().unwrap();
        t.check_invariants().unwrap();
        assert_eq!(t.sign_of(&z).unwrap(), 0);
    }

    #[test]
    fn insert_node_rejects_duplicates() {
        let mut t = TreedCircuit::new(2).unwrap();
        let one = t.const_marking(1).unwrap();
        let err = t.insert_node(&one).unwrap_err();
        assert!(matches!(err, Error::DuplicateValue(_)));
    }
}
