//! Reduced power circuits.
//!
//! A reduced circuit keeps all node values pairwise distinct, the nodes in a
//! list sorted by value, and a bit vector flagging neighbours whose values
//! differ by exactly a factor `q`.  On such a circuit markings can be
//! compared by a single digit scan from the most significant node downward,
//! without ever evaluating anything.

use std::cmp::Ordering;
use std::ops::Deref;

use crate::circuit::{q_ary_digits, Digit, Digits, Marking, NodeId, PowerCircuit};
use crate::error::{Error, Result};

const NO_POS: u32 = u32::MAX;

/// Classification of a difference `ε = e(A) - e(B)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum DiffClass {
    NegBig,
    NegOne,
    Zero,
    PosOne,
    PosBig,
}

impl DiffClass {
    fn from_sign(c: i64, unit: bool) -> Self {
        match (c > 0, unit) {
            (true, true) => DiffClass::PosOne,
            (true, false) => DiffClass::PosBig,
            (false, true) => DiffClass::NegOne,
            (false, false) => DiffClass::NegBig,
        }
    }

    pub(crate) fn ordering(self) -> Ordering {
        match self {
            DiffClass::NegBig | DiffClass::NegOne => Ordering::Less,
            DiffClass::Zero => Ordering::Equal,
            DiffClass::PosOne | DiffClass::PosBig => Ordering::Greater,
        }
    }

    pub(crate) fn is_unit(self) -> bool {
        matches!(self, DiffClass::NegOne | DiffClass::PosOne)
    }
}

/// Result of comparing two markings: the order of their values and whether
/// they differ by exactly one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ordering3 {
    pub ord: Ordering,
    pub unit_diff: bool,
}

impl From<DiffClass> for Ordering3 {
    fn from(c: DiffClass) -> Self {
        Ordering3 {
            ord: c.ordering(),
            unit_diff: c.is_unit(),
        }
    }
}

/// A maximal run `[start, end]` of positions whose values grow by factor `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Chain {
    pub start: usize,
    pub end: usize,
}

impl Chain {
    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Counters reported by one run of [`ReducedCircuit::extend_reduce`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExtendReport {
    /// `|U|`, the number of pending nodes absorbed.
    pub pending: usize,
    /// `|Γ'| - |Γ|`.
    pub growth: usize,
    pub collisions: usize,
    pub carries: u64,
    pub prolongations: usize,
}

/// Where a digit being adjusted lives: a registered marking or the
/// successor marking of a pending node.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Target {
    Slot(u32),
    Succ(NodeId),
}

/// A power circuit whose nodes are sorted by value, plus the bit vector.
///
/// Nodes not (yet) in the sorted list are *pending*; arithmetic operations
/// create such nodes and [`ReducedCircuit::extend_reduce`] absorbs them.
#[derive(Debug, Clone)]
pub struct ReducedCircuit {
    pub(crate) pc: PowerCircuit,
    pub(crate) order: Vec<NodeId>,
    pub(crate) bits: Vec<bool>,
    pos: Vec<u32>,
}

impl Deref for ReducedCircuit {
    type Target = PowerCircuit;

    fn deref(&self) -> &PowerCircuit {
        &self.pc
    }
}

impl ReducedCircuit {
    pub fn new(q: i64) -> Result<Self> {
        Ok(Self::wrap(PowerCircuit::new(q)?))
    }

    /// Treats every node of `pc` as pending.
    pub(crate) fn wrap(pc: PowerCircuit) -> Self {
        ReducedCircuit {
            pc,
            order: Vec::new(),
            bits: Vec::new(),
            pos: Vec::new(),
        }
    }

    /// Reduces an arbitrary circuit, preserving all registered markings.
    /// Growth is at most `|Γ|` additional nodes.
    pub fn reduce(pc: PowerCircuit) -> Result<(Self, ExtendReport)> {
        let n = pc.len();
        let mut rc = Self::wrap(pc);
        let report = rc.extend_reduce()?;
        assert!(rc.len() <= 2 * n, "reduction grew {} nodes to {}", n, rc.len());
        Ok((rc, report))
    }

    pub fn circuit(&self) -> &PowerCircuit {
        &self.pc
    }

    pub fn into_circuit(self) -> PowerCircuit {
        self.pc
    }

    /// Nodes of the reduced part, ascending by value.
    pub fn order(&self) -> &[NodeId] {
        &self.order
    }

    /// `bits()[i]` is true iff `q·e(order[i]) = e(order[i+1])`.
    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Position of `u` in the sorted list, if it is in the reduced part.
    pub fn position(&self, u: NodeId) -> Option<usize> {
        match self.pos.get(u.index()) {
            Some(&p) if p != NO_POS => Some(p as usize),
            _ => None,
        }
    }

    /// Nodes that are not yet in the reduced part.
    pub fn pending(&self) -> Vec<NodeId> {
        self.pc.nodes().filter(|&u| self.position(u).is_none()).collect()
    }

    pub fn is_reduced(&self) -> bool {
        self.order.len() == self.pc.len()
    }

    fn set_pos(&mut self, u: NodeId, p: usize) {
        if self.pos.len() <= u.index() {
            self.pos.resize(u.index() + 1, NO_POS);
        }
        self.pos[u.index()] = p as u32;
    }

    fn clear_pos(&mut self, u: NodeId) {
        if let Some(p) = self.pos.get_mut(u.index()) {
            *p = NO_POS;
        }
    }

    // -----------------------------------------------------------------------
    // Chains
    // -----------------------------------------------------------------------

    /// Whether the lowest node exists and has value 1.
    pub fn has_unit(&self) -> bool {
        self.order
            .first()
            .is_some_and(|&u| self.pc.node(u).is_ok_and(|n| n.succ.is_empty()))
    }

    /// Length of the base chain (0 if there is no node of value 1).
    pub fn base_chain_len(&self) -> usize {
        if !self.has_unit() {
            return 0;
        }
        1 + self.bits.iter().take_while(|&&b| b).count()
    }

    /// The maximal chain containing position `p`.
    pub fn chain_at(&self, p: usize) -> Chain {
        let mut start = p;
        while start > 0 && self.bits[start - 1] {
            start -= 1;
        }
        let mut end = p;
        while end + 1 < self.order.len() && self.bits[end] {
            end += 1;
        }
        Chain { start, end }
    }

    /// Position of the top of the maximal chain containing `p`.
    pub fn chain_top(&self, p: usize) -> usize {
        let mut end = p;
        while end + 1 < self.order.len() && self.bits[end] {
            end += 1;
        }
        end
    }

    /// All maximal chains in ascending order.
    pub fn chains(&self) -> Vec<Chain> {
        let mut out = Vec::new();
        let mut p = 0;
        while p < self.order.len() {
            let c = self.chain_at(p);
            p = c.end + 1;
            out.push(c);
        }
        out
    }

    /// Number of maximal chains `ch(Π)`.
    pub fn chain_count(&self) -> usize {
        if self.order.is_empty() {
            0
        } else {
            1 + self.bits.iter().filter(|&&b| !b).count()
        }
    }

    // -----------------------------------------------------------------------
    // Comparison
    // -----------------------------------------------------------------------

    /// Classifies `sa·e(a) - sb·e(b)` for digit vectors inside the reduced
    /// part.
    pub(crate) fn classify(&self, a: &Digits, sa: i64, b: &Digits, sb: i64) -> Result<DiffClass> {
        let mut items: Vec<(usize, i64)> = Vec::with_capacity(a.len() + b.len());
        for (u, &d) in a {
            items.push((self.position(*u).ok_or(Error::NotReduced)?, sa * i64::from(d)));
        }
        for (u, &d) in b {
            items.push((self.position(*u).ok_or(Error::NotReduced)?, -sb * i64::from(d)));
        }
        items.sort_unstable_by(|x, y| y.0.cmp(&x.0));
        let mut merged: Vec<(usize, i64)> = Vec::with_capacity(items.len());
        for (p, d) in items {
            match merged.last_mut() {
                Some(last) if last.0 == p => last.1 += d,
                _ => merged.push((p, d)),
            }
        }
        merged.retain(|&(_, d)| d != 0);
        Ok(self.scan(&merged))
    }

    /// Digit scan over `(position, digit)` pairs sorted by descending
    /// position with nonzero digits bounded by `2q - 2` in absolute value.
    fn scan(&self, items: &[(usize, i64)]) -> DiffClass {
        let q = i64::from(self.pc.q());
        let unit_at_zero = self.has_unit();
        let mut idx = 0;
        let mut c: i64 = 0;
        let mut p: usize = 0;
        loop {
            if c == 0 {
                match items.get(idx) {
                    None => return DiffClass::Zero,
                    Some(&(pp, d)) => {
                        p = pp;
                        c = d;
                        idx += 1;
                    }
                }
            }
            if c.abs() >= 2 {
                return DiffClass::from_sign(c, false);
            }
            if p == 0 {
                return DiffClass::from_sign(c, unit_at_zero);
            }
            let lower = match items.get(idx) {
                Some(&(pp, d)) if pp == p - 1 && self.bits[p - 1] => d,
                _ => 0,
            };
            if lower != 0 && lower.signum() != c.signum() {
                c = c * q + lower;
                p -= 1;
                idx += 1;
            } else {
                return DiffClass::from_sign(c, false);
            }
        }
    }

    fn node_succ(&self, u: NodeId) -> &Digits {
        &self.pc.node(u).expect("live node").succ
    }

    /// Compares two markings.
    pub fn compare(&self, k: &Marking, m: &Marking) -> Result<Ordering3> {
        let kd = self.pc.digits(k)?;
        let md = self.pc.digits(m)?;
        Ok(self.classify(kd, 1, md, 1)?.into())
    }

    /// Compares two digit vectors over the reduced part.
    pub fn compare_digits(&self, a: &Digits, b: &Digits) -> Result<Ordering3> {
        Ok(self.classify(a, 1, b, 1)?.into())
    }

    /// Sign of `e(M)`.
    pub fn sign_of(&self, m: &Marking) -> Result<i32> {
        let d = self.pc.digits(m)?;
        self.sign_of_digits(d)
    }

    pub fn sign_of_digits(&self, d: &Digits) -> Result<i32> {
        Ok(match self.classify(d, 1, &Digits::new(), 1)?.ordering() {
            Ordering::Less => -1,
            Ordering::Equal => 0,
            Ordering::Greater => 1,
        })
    }

    /// Whether `q^e(K)` divides `e(M)`.
    pub fn is_divisible_by_power(&self, m: &Marking, k: &Marking) -> Result<bool> {
        let md = self.pc.digits(m)?;
        let kd = self.pc.digits(k)?;
        self.divides_digits(md, kd)
    }

    /// Compares `sa·e(A)` with `sb·e(B)` for signs `sa, sb ∈ {-1, 1}`.
    pub fn compare_signed(&self, a: &Marking, sa: i64, b: &Marking, sb: i64) -> Result<Ordering3> {
        let ad = self.pc.digits(a)?;
        let bd = self.pc.digits(b)?;
        Ok(self.classify(ad, sa, bd, sb)?.into())
    }

    /// Whether `q^(s·e(K))` divides `e(M)` for a sign `s ∈ {-1, 1}`; a
    /// negative exponent always divides.
    pub fn is_divisible_by_signed_power(&self, m: &Marking, k: &Marking, s: i64) -> Result<bool> {
        let md = self.pc.digits(m)?;
        let kd = self.pc.digits(k)?;
        let mut lowest: Option<(usize, NodeId)> = None;
        for &u in md.keys() {
            let p = self.position(u).ok_or(Error::NotReduced)?;
            if lowest.is_none_or(|(lp, _)| p < lp) {
                lowest = Some((p, u));
            }
        }
        let Some((_, u)) = lowest else { return Ok(true) };
        let cls = self.classify(kd, s, self.node_succ(u), 1)?;
        Ok(cls.ordering() != Ordering::Greater)
    }

    pub(crate) fn divides_digits(&self, md: &Digits, kd: &Digits) -> Result<bool> {
        let mut lowest: Option<(usize, NodeId)> = None;
        for &u in md.keys() {
            let p = self.position(u).ok_or(Error::NotReduced)?;
            if lowest.is_none_or(|(lp, _)| p < lp) {
                lowest = Some((p, u));
            }
        }
        let Some((_, u)) = lowest else { return Ok(true) };
        let cls = self.classify(kd, 1, self.node_succ(u), 1)?;
        Ok(cls.ordering() != Ordering::Greater)
    }

    /// `q·e(a) = e(b)` for two nodes of the reduced part.
    fn is_next(&self, a: NodeId, b: NodeId) -> bool {
        let cls = self
            .classify(self.node_succ(b), 1, self.node_succ(a), 1)
            .expect("successors of reduced nodes are reduced");
        cls == DiffClass::PosOne
    }

    // -----------------------------------------------------------------------
    // Insertion
    // -----------------------------------------------------------------------

    /// Inserts `u` into the sorted list at position `j` and repairs the
    /// affected bits.
    pub(crate) fn insert_at(&mut self, j: usize, u: NodeId) {
        self.order.insert(j, u);
        for p in j..self.order.len() {
            let w = self.order[p];
            self.set_pos(w, p);
        }
        self.pc.charge(self.order.len() - j);
        let n = self.order.len();
        if n == 1 {
            return;
        }
        if j == 0 {
            let b = self.is_next(u, self.order[1]);
            self.bits.insert(0, b);
        } else if j == n - 1 {
            let b = self.is_next(self.order[j - 1], u);
            self.bits.push(b);
        } else {
            self.bits[j - 1] = self.is_next(self.order[j - 1], u);
            let b = self.is_next(u, self.order[j + 1]);
            self.bits.insert(j, b);
        }
    }

    /// Removes position `j` from the sorted list.  The node itself is not
    /// touched.
    pub(crate) fn remove_at(&mut self, j: usize) -> NodeId {
        let u = self.order.remove(j);
        self.clear_pos(u);
        for p in j..self.order.len() {
            let w = self.order[p];
            self.set_pos(w, p);
        }
        if !self.bits.is_empty() {
            if j == 0 {
                self.bits.remove(0);
            } else if j == self.order.len() {
                self.bits.pop();
            } else {
                // values are powers of q, so the new neighbours differ by at
                // least a factor q²
                self.bits.remove(j);
                self.bits[j - 1] = false;
            }
        }
        u
    }

    /// Binary search for the minimal position whose node value is at least
    /// `q^e(λ)`.  Returns the position and whether the values are equal.
    pub(crate) fn locate(&self, lambda: &Digits) -> Result<(usize, bool)> {
        let (mut lo, mut hi) = (0usize, self.order.len());
        let mut equal = false;
        while lo < hi {
            let mid = (lo + hi) / 2;
            let cls = self.classify(lambda, 1, self.node_succ(self.order[mid]), 1)?;
            match cls.ordering() {
                Ordering::Greater => lo = mid + 1,
                Ordering::Equal => {
                    equal = true;
                    lo = mid;
                    hi = mid;
                }
                Ordering::Less => hi = mid,
            }
        }
        Ok((lo, equal))
    }

    /// Position where a node with successor digits `lambda` belongs, found
    /// by binary search, and whether a node of that value exists.
    pub fn search_position(&self, lambda: &Digits) -> Result<(usize, bool)> {
        self.locate(lambda)
    }

    /// Adds a node of value `q^i` to the base chain, where `i` is the current
    /// base-chain length, and returns it.
    pub fn prolong_base_chain(&mut self) -> NodeId {
        let i = self.base_chain_len();
        let digits = q_ary_digits(i as u64, self.pc.q());
        let succ: Digits = digits
            .iter()
            .enumerate()
            .filter(|(_, &d)| d != 0)
            .map(|(l, &d)| (self.order[l], d))
            .collect();
        let u = self.pc.push_node(succ);
        self.insert_at(i, u);
        u
    }

    /// The base-chain node at exponent `l`, prolonging the chain as needed.
    pub(crate) fn base_node(&mut self, l: usize) -> NodeId {
        while self.base_chain_len() <= l {
            self.prolong_base_chain();
        }
        self.order[l]
    }

    // -----------------------------------------------------------------------
    // Digit adjustment with carries
    // -----------------------------------------------------------------------

    pub(crate) fn target_digit(&self, t: Target, v: NodeId) -> Digit {
        match t {
            Target::Slot(s) => self.pc.mark_digit(s, v),
            Target::Succ(w) => self.pc.edge(w, v),
        }
    }

    pub(crate) fn set_target_digit(&mut self, t: Target, v: NodeId, d: Digit) {
        match t {
            Target::Slot(s) => self.pc.set_mark_digit(s, v, d),
            Target::Succ(w) => self.pc.set_edge(w, v, d),
        }
    }

    /// Adds `amount` at position `p` of target `t`, propagating carries up
    /// the chain.  Returns the number of carry steps.
    pub(crate) fn add_with_carry(&mut self, t: Target, mut p: usize, mut amount: i64) -> u64 {
        let q = i64::from(self.pc.q());
        let mut carries = 0;
        loop {
            let v = self.order[p];
            let cur = i64::from(self.target_digit(t, v));
            let alpha = cur + amount;
            if alpha.abs() < q {
                self.set_target_digit(t, v, alpha as Digit);
                return carries;
            }
            let beta = alpha / q;
            let gamma = alpha % q;
            debug_assert!(gamma.abs() + beta.abs() < alpha.abs());
            self.set_target_digit(t, v, gamma as Digit);
            carries += 1;
            assert!(
                p + 1 < self.order.len() && self.bits[p],
                "carry left the chain at position {p}"
            );
            p += 1;
            amount = beta;
        }
    }

    // -----------------------------------------------------------------------
    // ERed
    // -----------------------------------------------------------------------

    /// Absorbs all pending nodes into the reduced part, adjusting every
    /// registered marking and every pending successor marking so that all
    /// values are preserved.
    pub fn extend_reduce(&mut self) -> Result<ExtendReport> {
        let topo = self.pending_order()?;
        let mut report = ExtendReport {
            pending: topo.len(),
            ..ExtendReport::default()
        };
        if topo.is_empty() {
            return Ok(report);
        }
        let before = self.order.len();
        for u in topo {
            self.absorb(u, &mut report)?;
        }
        report.growth = self.order.len() - before;
        assert!(
            report.growth <= 2 * report.pending,
            "extend_reduce grew by {} for {} pending nodes",
            report.growth,
            report.pending
        );
        Ok(report)
    }

    /// Pending nodes in an order where successors come first, after checking
    /// that no reduced node points into the pending part.
    pub(crate) fn pending_order(&self) -> Result<Vec<NodeId>> {
        let pending = self.pending();
        for &u in &pending {
            for &p in &self.pc.node(u)?.preds {
                if self.position(p).is_some() {
                    return Err(Error::InvalidEmbedding(p, u));
                }
            }
        }
        let pos = &self.pos;
        self.pc
            .post_order(&pending, |v| pos.get(v.index()).is_none_or(|&p| p == NO_POS))
    }

    fn absorb(&mut self, u: NodeId, report: &mut ExtendReport) -> Result<()> {
        if self.order.is_empty() {
            if !self.node_succ(u).is_empty() {
                // successors of a topologically minimal node lie in Γ = ∅
                unreachable!("first absorbed node must be a leaf");
            }
            self.insert_at(0, u);
            return Ok(());
        }
        let lambda = self.node_succ(u).clone();
        if self.sign_of_digits(&lambda)? < 0 {
            return Err(Error::NotAPowerCircuit(u));
        }
        let (j, equal) = self.locate(&lambda)?;
        self.pc.charge(lambda.len() + 1);
        if !equal {
            self.insert_at(j, u);
            return Ok(());
        }
        report.collisions += 1;
        let vj = self.order[j];
        let k = self.chain_top(j);
        let vk = self.order[k];
        let v = self.pc.clone_node(vk)?;
        let len_before = self.order.len();
        self.increment_succ(v);
        report.prolongations += self.order.len() - len_before;
        let lv = self.node_succ(v).clone();
        let (jv, eq_v) = self.locate(&lv)?;
        if eq_v {
            // a prolongation already created a node of this value
            self.pc.retire_node(v);
        } else {
            self.insert_at(jv, v);
        }
        self.replace_node(u, vj, report);
        Ok(())
    }

    /// Adds one to the successor marking of the pending node `v` along the
    /// base chain.
    fn increment_succ(&mut self, v: NodeId) {
        let top = i64::from(self.pc.base().max_digit());
        let mut l = 0;
        loop {
            let b = self.base_node(l);
            let d = self.pc.edge(v, b);
            if i64::from(d) < top {
                self.pc.set_edge(v, b, d + 1);
                return;
            }
            self.pc.set_edge(v, b, 0);
            l += 1;
        }
    }

    /// Replaces the pending node `u` by the reduced node `target` of equal
    /// value in every marking and pending successor marking, then retires
    /// `u`.
    pub(crate) fn replace_node(&mut self, u: NodeId, target: NodeId, report: &mut ExtendReport) {
        let slots: Vec<u32> = self.pc.mark_slots_of(u).expect("live").iter().copied().collect();
        let preds: Vec<NodeId> = self.pc.predecessors(u).expect("live").iter().copied().collect();
        for s in slots {
            let d = self.pc.mark_digit(s, u);
            self.pc.set_mark_digit(s, u, 0);
            let p = self.position(target).expect("reduced target");
            report.carries += self.add_with_carry(Target::Slot(s), p, i64::from(d));
        }
        for w in preds {
            let d = self.pc.edge(w, u);
            self.pc.set_edge(w, u, 0);
            let p = self.position(target).expect("reduced target");
            report.carries += self.add_with_carry(Target::Succ(w), p, i64::from(d));
        }
        self.pc.retire_node(u);
    }

    // -----------------------------------------------------------------------
    // Arithmetic (creates pending nodes; call `extend_reduce` afterwards)
    // -----------------------------------------------------------------------

    pub fn new_marking<I>(&mut self, digits: I) -> Result<Marking>
    where
        I: IntoIterator<Item = (NodeId, i64)>,
    {
        self.pc.new_marking(digits)
    }

    pub fn release(&mut self, m: Marking) -> Result<Digits> {
        self.pc.release(m)
    }

    pub fn clone_marking(&mut self, m: &Marking) -> Result<Marking> {
        self.pc.clone_marking(m)
    }

    pub fn add_markings(&mut self, k: Marking, m: Marking) -> Result<Marking> {
        self.pc.add_markings(k, m)
    }

    pub fn mult_by_power(&mut self, k: Marking, m: Marking) -> Result<Marking> {
        self.pc.mult_by_power(k, m)
    }

    pub fn negate(&mut self, m: &Marking) -> Result<()> {
        self.pc.negate(m)
    }

    /// A marking of value `n` on the base chain (prolonged as needed).
    pub fn const_marking(&mut self, n: i64) -> Result<Marking> {
        let digits = q_ary_digits(n.unsigned_abs(), self.pc.q());
        let sign = if n < 0 { -1 } else { 1 };
        let mut map = Digits::new();
        for (l, &d) in digits.iter().enumerate() {
            let b = self.base_node(l);
            if d != 0 {
                map.insert(b, sign * d);
            }
        }
        Ok(self.pc.register(map))
    }

    /// Copies a marking onto the same nodes (no cloning needed because
    /// markings are not structure).
    pub fn duplicate(&mut self, m: &Marking) -> Result<Marking> {
        let d = self.pc.digits(m)?.clone();
        Ok(self.pc.register(d))
    }

    // -----------------------------------------------------------------------
    // Maintenance
    // -----------------------------------------------------------------------

    /// Removes reduced nodes that are neither marked nor referenced by any
    /// edge, repeatedly.  Returns the number of removed nodes.
    pub fn collect_garbage(&mut self) -> usize {
        let mut removed = 0;
        let mut p = self.order.len();
        while p > 0 {
            p -= 1;
            let u = self.order[p];
            let n = self.pc.node(u).expect("live");
            if n.preds.is_empty() && n.marks.is_empty() {
                self.remove_at(p);
                self.pc.retire_node(u);
                removed += 1;
            }
        }
        removed
    }

    /// Checks the reduced-circuit invariants using only comparisons.
    pub fn check_invariants(&self) -> Result<()> {
        self.pc.check_structure()?;
        if self.bits.len() + 1 != self.order.len().max(1) {
            return Err(Error::Validation("bit vector length".into()));
        }
        for (p, &u) in self.order.iter().enumerate() {
            if self.position(u) != Some(p) {
                return Err(Error::Validation(format!("position index of {u}")));
            }
            for v in self.node_succ(u).keys() {
                if self.position(*v).is_none() {
                    return Err(Error::Validation(format!("{u} points to pending {v}")));
                }
            }
            if self.sign_of_digits(self.node_succ(u))? < 0 {
                return Err(Error::NotAPowerCircuit(u));
            }
        }
        for p in 1..self.order.len() {
            let cls = self.classify(
                self.node_succ(self.order[p]),
                1,
                self.node_succ(self.order[p - 1]),
                1,
            )?;
            if cls.ordering() != Ordering::Greater {
                return Err(Error::Validation(format!("order violated at {p}")));
            }
            if (cls == DiffClass::PosOne) != self.bits[p - 1] {
                return Err(Error::Validation(format!("bit {} wrong", p - 1)));
            }
        }
        Ok(())
    }
}

/// Whether an acyclic digit-labelled graph is a power circuit, decided by
/// attempting a reduction.
pub fn is_power_circuit(pc: &PowerCircuit) -> Result<bool> {
    match ReducedCircuit::reduce(pc.clone()) {
        Ok(_) => Ok(true),
        Err(Error::NotAPowerCircuit(_)) => Ok(false),
        Err(e) => Err(e),
    }
}
