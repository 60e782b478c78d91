//! The raw power-circuit graph.
//!
//! A power circuit over base `q` is an acyclic graph whose edges carry
//! digits from `D = {-q+1, ..., q-1} \ {0}`.  Every node `u` evaluates to
//! `q^e(Λ_u)` where `Λ_u` is the marking formed by its outgoing edges, and a
//! marking `M` evaluates to `Σ M(u)·e(u)`.  Values are never computed by the
//! algorithms; [`PowerCircuit::eval_marking`] exists purely as a guarded
//! oracle for tests and small inputs.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::atomic::{AtomicU32, Ordering};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// A single signed digit.
pub type Digit = i32;

/// Sparse digit vector over nodes; zero digits are never stored.
pub type Digits = BTreeMap<NodeId, Digit>;

/// Default bit budget for the evaluation oracle.
pub const DEFAULT_MAX_BITS: u64 = 4096;

static NEXT_CIRCUIT_ID: AtomicU32 = AtomicU32::new(1);

fn fresh_circuit_id() -> u32 {
    NEXT_CIRCUIT_ID.fetch_add(1, Ordering::Relaxed)
}

// ---------------------------------------------------------------------------
// Base and identifiers
// ---------------------------------------------------------------------------

/// The base `q ≥ 2` together with its digit interval `D`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Base {
    q: Digit,
}

impl Base {
    pub fn new(q: i64) -> Result<Self> {
        if !(2..=i64::from(i16::MAX)).contains(&q) {
            return Err(Error::InvalidBase(q));
        }
        Ok(Base { q: q as Digit })
    }

    #[inline]
    pub fn q(self) -> Digit {
        self.q
    }

    /// Largest digit, `q - 1`.
    #[inline]
    pub fn max_digit(self) -> Digit {
        self.q - 1
    }

    /// Whether `d ∈ D`.
    #[inline]
    pub fn contains(self, d: i64) -> bool {
        d.abs() < i64::from(self.q)
    }

    /// Number of digits in `D`, i.e. `2q - 1`.
    #[inline]
    pub fn digit_count(self) -> usize {
        (2 * self.q - 1) as usize
    }

    pub(crate) fn check(self, d: i64) -> Result<Digit> {
        if self.contains(d) {
            Ok(d as Digit)
        } else {
            Err(Error::InvalidDigit { digit: d, q: self.q })
        }
    }
}

/// Identifier of a node.  Ids are never reused within one circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub(crate) u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Handle of a marking registered with a circuit.
///
/// Handles are deliberately not `Clone`: operations such as
/// [`PowerCircuit::add_markings`] consume their operands, and a generation
/// counter rejects any handle whose slot has since been released.
#[derive(Debug, PartialEq, Eq)]
pub struct Marking {
    pub(crate) circuit: u32,
    pub(crate) slot: u32,
    pub(crate) gen: u32,
}

// ---------------------------------------------------------------------------
// Storage
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Default)]
pub(crate) struct Node {
    /// Outgoing edges; this is the successor marking `Λ_u`.
    pub(crate) succ: Digits,
    pub(crate) preds: BTreeSet<NodeId>,
    /// Slots of registered markings whose support contains this node.
    pub(crate) marks: BTreeSet<u32>,
}

#[derive(Debug, Clone)]
struct Slot {
    gen: u32,
    digits: Option<Digits>,
}

/// An acyclic digit-labelled graph together with its registered markings.
#[derive(Debug)]
pub struct PowerCircuit {
    id: u32,
    base: Base,
    nodes: Vec<Option<Node>>,
    live: usize,
    slots: Vec<Slot>,
    free: Vec<u32>,
    const_chain: Vec<NodeId>,
    work: u64,
}

impl Clone for PowerCircuit {
    /// Clones the graph and marking contents under a fresh circuit identity;
    /// handles of the original are not valid for the copy.
    fn clone(&self) -> Self {
        PowerCircuit {
            id: fresh_circuit_id(),
            base: self.base,
            nodes: self.nodes.clone(),
            live: self.live,
            slots: self.slots.clone(),
            free: self.free.clone(),
            const_chain: self.const_chain.clone(),
            work: self.work,
        }
    }
}

impl PowerCircuit {
    pub fn new(q: i64) -> Result<Self> {
        Ok(Self::with_base(Base::new(q)?))
    }

    pub fn with_base(base: Base) -> Self {
        PowerCircuit {
            id: fresh_circuit_id(),
            base,
            nodes: Vec::new(),
            live: 0,
            slots: Vec::new(),
            free: Vec::new(),
            const_chain: Vec::new(),
            work: 0,
        }
    }

    #[inline]
    pub fn base(&self) -> Base {
        self.base
    }

    #[inline]
    pub fn q(&self) -> Digit {
        self.base.q
    }

    /// Number of live nodes `|Γ|`.
    #[inline]
    pub fn len(&self) -> usize {
        self.live
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.live == 0
    }

    /// Total number of node ids ever handed out (live or retired).
    pub fn id_bound(&self) -> usize {
        self.nodes.len()
    }

    /// Work counter: number of node/edge/digit touches performed so far.
    #[inline]
    pub fn work(&self) -> u64 {
        self.work
    }

    #[inline]
    pub(crate) fn charge(&mut self, n: usize) {
        self.work += n as u64;
    }

    pub fn contains(&self, u: NodeId) -> bool {
        matches!(self.nodes.get(u.index()), Some(Some(_)))
    }

    /// Live nodes in ascending id order.
    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.is_some())
            .map(|(i, _)| NodeId(i as u32))
    }

    pub(crate) fn node(&self, u: NodeId) -> Result<&Node> {
        self.nodes
            .get(u.index())
            .and_then(Option::as_ref)
            .ok_or(Error::UnknownNode(u))
    }

    /// The successor marking `Λ_u`.
    pub fn successors(&self, u: NodeId) -> Result<&Digits> {
        Ok(&self.node(u)?.succ)
    }

    pub fn predecessors(&self, u: NodeId) -> Result<&BTreeSet<NodeId>> {
        Ok(&self.node(u)?.preds)
    }

    /// Number of registered markings whose support contains `u`.
    pub fn mark_refs(&self, u: NodeId) -> Result<usize> {
        Ok(self.node(u)?.marks.len())
    }

    pub(crate) fn mark_slots_of(&self, u: NodeId) -> Result<&BTreeSet<u32>> {
        Ok(&self.node(u)?.marks)
    }

    pub fn is_leaf(&self, u: NodeId) -> Result<bool> {
        Ok(self.node(u)?.succ.is_empty())
    }

    /// Number of edges `|supp δ|`.
    pub fn edge_count(&self) -> usize {
        self.nodes.iter().flatten().map(|n| n.succ.len()).sum()
    }

    // -----------------------------------------------------------------------
    // Graph construction
    // -----------------------------------------------------------------------

    /// Creates a node with the given successor marking.  Zero digits are
    /// skipped.  The new node has no incoming edges, so acyclicity is kept.
    pub fn add_node<I>(&mut self, succ: I) -> Result<NodeId>
    where
        I: IntoIterator<Item = (NodeId, i64)>,
    {
        let mut map = Digits::new();
        for (v, d) in succ {
            self.node(v)?;
            let d = self.base.check(d)?;
            if d == 0 {
                continue;
            }
            if map.insert(v, d).is_some() {
                return Err(Error::MultiEdge(NodeId(self.nodes.len() as u32), v));
            }
        }
        Ok(self.push_node(map))
    }

    pub(crate) fn push_node(&mut self, succ: Digits) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        self.charge(1 + succ.len());
        for &v in succ.keys() {
            self.nodes[v.index()]
                .as_mut()
                .expect("successor must be live")
                .preds
                .insert(id);
        }
        self.nodes.push(Some(Node {
            succ,
            ..Node::default()
        }));
        self.live += 1;
        id
    }

    /// Adds the edge `u -> v` with the given label, rejecting zero labels,
    /// multi-edges and cycles.
    pub fn add_edge(&mut self, u: NodeId, v: NodeId, label: i64) -> Result<()> {
        self.node(u)?;
        self.node(v)?;
        let d = self.base.check(label)?;
        if d == 0 {
            return Err(Error::InvalidDigit { digit: 0, q: self.q() });
        }
        if self.node(u)?.succ.contains_key(&v) {
            return Err(Error::MultiEdge(u, v));
        }
        if u == v || self.reaches(v, u) {
            return Err(Error::Cycle(u, v));
        }
        self.set_edge(u, v, d);
        Ok(())
    }

    /// Whether `to` is reachable from `from` along edges.
    fn reaches(&self, from: NodeId, to: NodeId) -> bool {
        let mut seen = BTreeSet::new();
        let mut stack = vec![from];
        while let Some(x) = stack.pop() {
            if x == to {
                return true;
            }
            if !seen.insert(x) {
                continue;
            }
            if let Some(Some(n)) = self.nodes.get(x.index()) {
                stack.extend(n.succ.keys().copied());
            }
        }
        false
    }

    /// Sets `δ(u, v) = d` (removing the edge when `d = 0`) without any
    /// structural checks.  Callers guarantee acyclicity.
    pub(crate) fn set_edge(&mut self, u: NodeId, v: NodeId, d: Digit) {
        debug_assert!(self.base.contains(i64::from(d)));
        self.work += 1;
        let nu = self.nodes[u.index()].as_mut().expect("live source");
        if d == 0 {
            if nu.succ.remove(&v).is_some() {
                self.nodes[v.index()].as_mut().expect("live target").preds.remove(&u);
            }
        } else if nu.succ.insert(v, d).is_none() {
            self.nodes[v.index()].as_mut().expect("live target").preds.insert(u);
        }
    }

    pub(crate) fn edge(&self, u: NodeId, v: NodeId) -> Digit {
        self.nodes[u.index()]
            .as_ref()
            .and_then(|n| n.succ.get(&v).copied())
            .unwrap_or(0)
    }

    /// Removes a node that has no incoming edges and no marking references.
    /// Its id is retired.
    pub(crate) fn retire_node(&mut self, u: NodeId) {
        let node = self.nodes[u.index()].take().expect("live node");
        debug_assert!(node.preds.is_empty(), "retiring a node with predecessors");
        debug_assert!(node.marks.is_empty(), "retiring a marked node");
        for v in node.succ.keys() {
            if let Some(Some(n)) = self.nodes.get_mut(v.index()) {
                n.preds.remove(&u);
            }
        }
        self.live -= 1;
        self.work += 1 + node.succ.len() as u64;
    }

    /// Verifies the structural invariants: acyclic, labels in `D \ {0}`,
    /// consistent reverse indices.
    pub fn check_structure(&self) -> Result<()> {
        for (i, n) in self.nodes.iter().enumerate() {
            let Some(n) = n else { continue };
            let u = NodeId(i as u32);
            for (&v, &d) in &n.succ {
                if d == 0 || !self.base.contains(i64::from(d)) {
                    return Err(Error::Validation(format!("label {d} on {u} -> {v}")));
                }
                let t = self.node(v)?;
                if !t.preds.contains(&u) {
                    return Err(Error::Validation(format!("missing reverse edge {u} -> {v}")));
                }
            }
            for &p in &n.preds {
                if !self.node(p)?.succ.contains_key(&u) {
                    return Err(Error::Validation(format!("stale predecessor {p} of {u}")));
                }
            }
            for &s in &n.marks {
                let ok = self
                    .slots
                    .get(s as usize)
                    .and_then(|sl| sl.digits.as_ref())
                    .is_some_and(|m| m.contains_key(&u));
                if !ok {
                    return Err(Error::Validation(format!("stale marking reference on {u}")));
                }
            }
        }
        for (s, sl) in self.slots.iter().enumerate() {
            if let Some(m) = &sl.digits {
                for (&u, &d) in m {
                    if d == 0 || !self.base.contains(i64::from(d)) {
                        return Err(Error::Validation(format!("marking digit {d} on {u}")));
                    }
                    if !self.node(u)?.marks.contains(&(s as u32)) {
                        return Err(Error::Validation(format!("missing marking reference on {u}")));
                    }
                }
            }
        }
        self.topological_order().map(|_| ())
    }

    /// Topological order (successors first) by depth-first post-order,
    /// visiting roots and successors in ascending id order.
    pub fn topological_order(&self) -> Result<Vec<NodeId>> {
        let all: Vec<NodeId> = self.nodes().collect();
        self.post_order(&all, |_| true)
    }

    /// Depth-first post-order restricted to nodes satisfying `keep`,
    /// starting from `roots` in the given order.
    pub(crate) fn post_order(
        &self,
        roots: &[NodeId],
        keep: impl Fn(NodeId) -> bool,
    ) -> Result<Vec<NodeId>> {
        // 0 = unseen, 1 = on stack, 2 = done
        let mut state: HashMap<NodeId, u8> = HashMap::new();
        let mut out = Vec::new();
        for &r in roots {
            if state.contains_key(&r) || !keep(r) {
                continue;
            }
            let mut stack: Vec<(NodeId, Vec<NodeId>)> = Vec::new();
            state.insert(r, 1);
            let kids: Vec<NodeId> = self.node(r)?.succ.keys().rev().copied().collect();
            stack.push((r, kids));
            while let Some((u, kids)) = stack.last_mut() {
                let u = *u;
                match kids.pop() {
                    Some(v) => {
                        if !keep(v) {
                            continue;
                        }
                        match state.get(&v) {
                            Some(1) => return Err(Error::Cycle(u, v)),
                            Some(_) => {}
                            None => {
                                state.insert(v, 1);
                                let vk: Vec<NodeId> =
                                    self.node(v)?.succ.keys().rev().copied().collect();
                                stack.push((v, vk));
                            }
                        }
                    }
                    None => {
                        state.insert(u, 2);
                        out.push(u);
                        stack.pop();
                    }
                }
            }
        }
        Ok(out)
    }

    // -----------------------------------------------------------------------
    // Markings
    // -----------------------------------------------------------------------

    fn slot_digits(&self, m: &Marking) -> Result<&Digits> {
        if m.circuit != self.id {
            return Err(Error::CircuitMismatch);
        }
        match self.slots.get(m.slot as usize) {
            Some(Slot { gen, digits: Some(d) }) if *gen == m.gen => Ok(d),
            _ => Err(Error::StaleMarking),
        }
    }

    pub(crate) fn check_marking(&self, m: &Marking) -> Result<()> {
        self.slot_digits(m).map(|_| ())
    }

    /// Registers a marking with the given digits.
    pub fn new_marking<I>(&mut self, digits: I) -> Result<Marking>
    where
        I: IntoIterator<Item = (NodeId, i64)>,
    {
        let mut map = Digits::new();
        for (u, d) in digits {
            self.node(u)?;
            let d = self.base.check(d)?;
            if d != 0 {
                let e = map.entry(u).or_insert(0);
                let s = i64::from(*e) + i64::from(d);
                *e = self.base.check(s)?;
                if *e == 0 {
                    map.remove(&u);
                }
            }
        }
        Ok(self.register(map))
    }

    pub(crate) fn register(&mut self, digits: Digits) -> Marking {
        self.charge(1 + digits.len());
        let slot = match self.free.pop() {
            Some(s) => s,
            None => {
                self.slots.push(Slot { gen: 0, digits: None });
                (self.slots.len() - 1) as u32
            }
        };
        for &u in digits.keys() {
            self.nodes[u.index()].as_mut().expect("live node").marks.insert(slot);
        }
        let sl = &mut self.slots[slot as usize];
        sl.digits = Some(digits);
        Marking {
            circuit: self.id,
            slot,
            gen: sl.gen,
        }
    }

    fn take_slot(&mut self, slot: u32) -> Digits {
        let sl = &mut self.slots[slot as usize];
        let digits = sl.digits.take().expect("live slot");
        sl.gen = sl.gen.wrapping_add(1);
        self.free.push(slot);
        for &u in digits.keys() {
            if let Some(Some(n)) = self.nodes.get_mut(u.index()) {
                n.marks.remove(&slot);
            }
        }
        digits
    }

    /// Unregisters a marking, returning its digits.
    pub fn release(&mut self, m: Marking) -> Result<Digits> {
        self.check_marking(&m)?;
        Ok(self.take_slot(m.slot))
    }

    /// Digits of a marking.
    pub fn digits(&self, m: &Marking) -> Result<&Digits> {
        self.slot_digits(m)
    }

    /// `|supp M|`.
    pub fn support_len(&self, m: &Marking) -> Result<usize> {
        Ok(self.slot_digits(m)?.len())
    }

    /// Slot number of a valid marking (stable while the marking lives).
    pub(crate) fn slot_of(&self, m: &Marking) -> Result<u32> {
        self.check_marking(m)?;
        Ok(m.slot)
    }

    pub(crate) fn slot_digits_raw(&self, slot: u32) -> &Digits {
        self.slots[slot as usize].digits.as_ref().expect("live slot")
    }

    /// Number of live registered markings.
    pub fn marking_count(&self) -> usize {
        self.slots.iter().filter(|s| s.digits.is_some()).count()
    }

    /// Live slots in ascending order.
    pub(crate) fn live_slots(&self) -> impl Iterator<Item = u32> + '_ {
        self.slots
            .iter()
            .enumerate()
            .filter(|(_, s)| s.digits.is_some())
            .map(|(i, _)| i as u32)
    }

    /// Total support size of all registered markings.
    pub fn total_support(&self) -> usize {
        self.slots
            .iter()
            .filter_map(|s| s.digits.as_ref())
            .map(BTreeMap::len)
            .sum()
    }

    pub(crate) fn mark_digit(&self, slot: u32, u: NodeId) -> Digit {
        self.slot_digits_raw(slot).get(&u).copied().unwrap_or(0)
    }

    /// Sets one digit of a registered marking, keeping reverse indices.
    pub(crate) fn set_mark_digit(&mut self, slot: u32, u: NodeId, d: Digit) {
        debug_assert!(self.base.contains(i64::from(d)));
        self.work += 1;
        let digits = self.slots[slot as usize].digits.as_mut().expect("live slot");
        if d == 0 {
            if digits.remove(&u).is_some() {
                self.nodes[u.index()].as_mut().expect("live node").marks.remove(&slot);
            }
        } else if digits.insert(u, d).is_none() {
            self.nodes[u.index()].as_mut().expect("live node").marks.insert(slot);
        }
    }

    // -----------------------------------------------------------------------
    // Arithmetic
    // -----------------------------------------------------------------------

    /// Creates a node with the same successor marking as `u` and no
    /// incoming edges.
    pub fn clone_node(&mut self, u: NodeId) -> Result<NodeId> {
        let succ = self.node(u)?.succ.clone();
        Ok(self.push_node(succ))
    }

    /// Clones every node in the support of `m`; the result carries the same
    /// digits on the fresh clones.
    pub fn clone_marking(&mut self, m: &Marking) -> Result<Marking> {
        let digits = self.slot_digits(m)?.clone();
        let mut out = Digits::new();
        for (u, d) in digits {
            let v = self.clone_node(u)?;
            out.insert(v, d);
        }
        Ok(self.register(out))
    }

    /// Returns a marking of value `e(K) + e(M)`, consuming both operands.
    /// Nodes where the digit sum leaves `D` are cloned.
    pub fn add_markings(&mut self, k: Marking, m: Marking) -> Result<Marking> {
        self.check_marking(&k)?;
        self.check_marking(&m)?;
        let mut r = self.take_slot(k.slot);
        let md = self.take_slot(m.slot);
        for (u, d) in md {
            let sum = r.get(&u).copied().unwrap_or(0) + d;
            self.work += 1;
            if self.base.contains(i64::from(sum)) {
                if sum == 0 {
                    r.remove(&u);
                } else {
                    r.insert(u, sum);
                }
            } else {
                let v = self.clone_node(u)?;
                r.insert(v, d);
            }
        }
        Ok(self.register(r))
    }

    /// Returns a marking of value `e(K)·q^e(M)`, consuming both operands.
    pub fn mult_by_power(&mut self, k: Marking, m: Marking) -> Result<Marking> {
        self.check_marking(&k)?;
        self.check_marking(&m)?;
        let kd = self.take_slot(k.slot);
        let md = self.take_slot(m.slot);
        let mut mc = Vec::with_capacity(md.len());
        for (v, d) in md {
            mc.push((self.clone_node(v)?, d));
        }
        let mut r = Digits::new();
        for (u, d) in kd {
            let u2 = self.clone_node(u)?;
            for &(v2, e) in &mc {
                self.set_edge(u2, v2, e);
            }
            r.insert(u2, d);
        }
        Ok(self.register(r))
    }

    /// Negates a marking in place.
    pub fn negate(&mut self, m: &Marking) -> Result<()> {
        self.check_marking(m)?;
        let digits = self.slots[m.slot as usize].digits.as_mut().expect("live slot");
        for d in digits.values_mut() {
            *d = -*d;
        }
        self.work += digits.len() as u64;
        Ok(())
    }

    /// A marking of value `n` over a chain of nodes of values `1, q, q², …`
    /// which is built on demand and reused by later calls.
    pub fn const_marking(&mut self, n: i64) -> Result<Marking> {
        let digits = q_ary_digits(n.unsigned_abs(), self.q());
        if !self.const_chain.iter().all(|&u| self.contains(u)) {
            self.const_chain.clear();
        }
        while self.const_chain.len() < digits.len() {
            let i = self.const_chain.len() as u64;
            let exp = q_ary_digits(i, self.q());
            let succ: Digits = exp
                .iter()
                .enumerate()
                .filter(|(_, &d)| d != 0)
                .map(|(j, &d)| (self.const_chain[j], d))
                .collect();
            let u = self.push_node(succ);
            self.const_chain.push(u);
        }
        let sign = if n < 0 { -1 } else { 1 };
        let map: Digits = digits
            .iter()
            .enumerate()
            .filter(|(_, &d)| d != 0)
            .map(|(j, &d)| (self.const_chain[j], sign * d))
            .collect();
        Ok(self.register(map))
    }

    // -----------------------------------------------------------------------
    // Evaluation oracle
    // -----------------------------------------------------------------------

    /// Exact value `e(u)`, failing with `Overflow` beyond `max_bits` bits.
    pub fn eval_node(&self, u: NodeId, max_bits: u64) -> Result<BigInt> {
        let mut memo = HashMap::new();
        self.eval_node_memo(u, max_bits, &mut memo)
    }

    /// Exact value `e(M)`.
    pub fn eval_marking(&self, m: &Marking, max_bits: u64) -> Result<BigInt> {
        let digits = self.slot_digits(m)?;
        self.eval_digits(digits, max_bits)
    }

    /// Exact value of an arbitrary digit vector over this circuit.
    pub fn eval_digits(&self, digits: &Digits, max_bits: u64) -> Result<BigInt> {
        let mut memo = HashMap::new();
        let mut sum = BigInt::zero();
        for (&u, &d) in digits {
            sum += self.eval_node_memo(u, max_bits, &mut memo)? * d;
        }
        Ok(sum)
    }

    /// Exact values of all nodes, indexed by id (`None` for retired ids).
    pub fn eval_all(&self, max_bits: u64) -> Result<Vec<Option<BigInt>>> {
        let mut memo = HashMap::new();
        let mut out = vec![None; self.nodes.len()];
        for u in self.nodes() {
            out[u.index()] = Some(self.eval_node_memo(u, max_bits, &mut memo)?);
        }
        Ok(out)
    }

    fn eval_node_memo(
        &self,
        u: NodeId,
        max_bits: u64,
        memo: &mut HashMap<NodeId, BigInt>,
    ) -> Result<BigInt> {
        if let Some(v) = memo.get(&u) {
            return Ok(v.clone());
        }
        let order = self.post_order(&[u], |_| true)?;
        for w in order {
            if memo.contains_key(&w) {
                continue;
            }
            let mut exp = BigInt::zero();
            for (v, &d) in &self.node(w)?.succ {
                exp += &memo[v] * d;
            }
            if exp.is_negative() {
                return Err(Error::NotAPowerCircuit(w));
            }
            let val = pow_guarded(self.q(), &exp, max_bits)?;
            memo.insert(w, val);
        }
        Ok(memo[&u].clone())
    }
}

/// `q^exp` if it fits into `max_bits` bits.
pub(crate) fn pow_guarded(q: Digit, exp: &BigInt, max_bits: u64) -> Result<BigInt> {
    let e = exp.to_u64().filter(|&e| e <= max_bits).ok_or(Error::Overflow(max_bits))?;
    let bits_per_digit = f64::from(q).log2();
    if (e as f64) * bits_per_digit > max_bits as f64 + 1.0 {
        return Err(Error::Overflow(max_bits));
    }
    let v = num_traits::pow(BigInt::from(q), e as usize);
    if v.bits() > max_bits {
        return Err(Error::Overflow(max_bits));
    }
    Ok(v)
}

/// Little-endian base-`q` digits of `n` (empty for zero).
pub fn q_ary_digits(mut n: u64, q: Digit) -> Vec<Digit> {
    let q = q as u64;
    let mut out = Vec::new();
    while n > 0 {
        out.push((n % q) as Digit);
        n /= q;
    }
    out
}

/// The tower function: `tow_q(0) = 1`, `tow_q(n+1) = q^tow_q(n)`.
pub fn tow(q: i64, n: u32, max_bits: u64) -> Result<BigInt> {
    let base = Base::new(q)?;
    let mut v = BigInt::one();
    for _ in 0..n {
        v = pow_guarded(base.q(), &v, max_bits)?;
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> (PowerCircuit, Marking, [NodeId; 5]) {
        let mut pc = PowerCircuit::new(2).unwrap();
        let one = pc.add_node([]).unwrap();
        let one_b = pc.add_node([]).unwrap();
        let two = pc.add_node([(one, 1)]).unwrap();
        let four = pc.add_node([(one, 1), (one_b, 1)]).unwrap();
        let n32 = pc.add_node([(one, -1), (two, 1), (four, 1)]).unwrap();
        let m = pc.new_marking([(n32, 1), (four, -1), (one, 1)]).unwrap();
        (pc, m, [one, one_b, two, four, n32])
    }

    #[test]
    fn base_rejects_small_q() {
        assert_eq!(PowerCircuit::new(1).unwrap_err(), Error::InvalidBase(1));
        let pc = PowerCircuit::new(3).unwrap();
        assert!(pc.is_empty());
        assert!(pc.base().contains(-2) && pc.base().contains(2) && !pc.base().contains(3));
    }

    #[test]
    fn sample_marking_is_29() {
        let (pc, m, nodes) = sample();
        assert_eq!(pc.eval_marking(&m, DEFAULT_MAX_BITS).unwrap(), BigInt::from(29));
        let values: Vec<i64> = nodes
            .iter()
            .map(|&u| pc.eval_node(u, 64).unwrap().try_into().unwrap())
            .collect();
        assert_eq!(values, vec![1, 1, 2, 4, 32]);
    }

    #[test]
    fn negate_flips_value() {
        let (mut pc, m, _) = sample();
        pc.negate(&m).unwrap();
        assert_eq!(pc.eval_marking(&m, 64).unwrap(), BigInt::from(-29));
        pc.negate(&m).unwrap();
        assert_eq!(pc.eval_marking(&m, 64).unwrap(), BigInt::from(29));
    }

    #[test]
    fn negative_exponent_values_and_rejection() {
        let mut pc = PowerCircuit::new(3).unwrap();
        let u1 = pc.add_node([]).unwrap();
        let u2 = pc.add_node([(u1, 1)]).unwrap();
        let u3 = pc.add_node([(u1, 2)]).unwrap();
        let u4 = pc.add_node([(u1, -1), (u2, -2), (u3, 1)]).unwrap();
        let u5 = pc.add_node([(u2, 2), (u3, 1), (u4, -2)]).unwrap();
        assert_eq!(pc.eval_node(u2, 64).unwrap(), BigInt::from(3));
        assert_eq!(pc.eval_node(u3, 64).unwrap(), BigInt::from(9));
        assert_eq!(pc.eval_node(u4, 64).unwrap(), BigInt::from(9));
        assert_eq!(pc.eval_node(u5, 64).unwrap_err(), Error::NotAPowerCircuit(u5));
    }

    #[test]
    fn tower_chain_matches_tow() {
        for q in [2i64, 3] {
            for n in 0..=4u32 {
                let expected = match tow(q, n, 1 << 16) {
                    Ok(v) => v,
                    Err(_) => continue,
                };
                let mut pc = PowerCircuit::new(q).unwrap();
                let mut top = pc.add_node([]).unwrap();
                for _ in 0..n {
                    top = pc.add_node([(top, 1)]).unwrap();
                }
                let m = pc.new_marking([(top, 1)]).unwrap();
                assert_eq!(pc.eval_marking(&m, 1 << 16).unwrap(), expected);
            }
        }
        assert_eq!(tow(2, 0, 64).unwrap(), BigInt::from(1));
        assert_eq!(tow(2, 3, 64).unwrap(), BigInt::from(16));
        assert_eq!(tow(3, 2, 64).unwrap(), BigInt::from(27));
        assert_eq!(tow(2, 5, 4096).unwrap_err(), Error::Overflow(4096));
    }

    #[test]
    fn clone_copies_edges() {
        let mut pc = PowerCircuit::new(3).unwrap();
        let one = pc.add_node([]).unwrap();
        let three = pc.add_node([(one, 1)]).unwrap();
        let nine = pc.add_node([(one, -1), (three, 1)]).unwrap();
        let n27 = pc.add_node([(three, -2), (nine, 1)]).unwrap();
        let m = pc.new_marking([(n27, 2), (nine, -1)]).unwrap();
        let c = pc.clone_marking(&m).unwrap();
        assert_eq!(pc.len(), 6);
        let cd: Vec<Digit> = pc.digits(&c).unwrap().values().copied().collect();
        assert_eq!(cd, vec![-1, 2]);
        let nine_clone = *pc.digits(&c).unwrap().keys().next().unwrap();
        assert_eq!(pc.successors(nine_clone).unwrap(), pc.successors(nine).unwrap());
        assert!(pc.predecessors(nine_clone).unwrap().is_empty());
        assert_eq!(pc.eval_marking(&c, 64).unwrap(), BigInt::from(45));
        assert_eq!(pc.eval_marking(&m, 64).unwrap(), BigInt::from(45));
    }

    #[test]
    fn addition_example_is_42() {
        let mut pc = PowerCircuit::new(2).unwrap();
        let one = pc.add_node([]).unwrap();
        let two = pc.add_node([(one, 1)]).unwrap();
        let four = pc.add_node([(two, 1)]).unwrap();
        let n16 = pc.add_node([(four, 1)]).unwrap();
        let n32 = pc.add_node([(one, 1), (four, 1)]).unwrap();
        let _n2048 = pc.add_node([(one, -1), (four, -1), (n16, 1)]).unwrap();
        let k = pc.new_marking([(four, 1), (two, 1), (one, 1)]).unwrap();
        let m = pc.new_marking([(n32, 1), (four, 1), (one, -1)]).unwrap();
        assert_eq!(pc.eval_marking(&k, 64).unwrap(), BigInt::from(7));
        assert_eq!(pc.eval_marking(&m, 64).unwrap(), BigInt::from(35));
        let r = pc.add_markings(k, m).unwrap();
        assert_eq!(pc.eval_marking(&r, 64).unwrap(), BigInt::from(42));
        let d = pc.digits(&r).unwrap();
        assert!(!d.contains_key(&one));
        assert_eq!(d.get(&four), Some(&1));
        assert_eq!(d.len(), 4);
        assert_eq!(pc.len(), 7);
    }

    #[test]
    fn multiplication_example_is_192() {
        let mut pc = PowerCircuit::new(2).unwrap();
        let one = pc.add_node([]).unwrap();
        let two = pc.add_node([(one, 1)]).unwrap();
        let four = pc.add_node([(two, 1)]).unwrap();
        let one_a = pc.add_node([]).unwrap();
        let two_a = pc.add_node([(one, 1)]).unwrap();
        let four_a = pc.add_node([(one, 1), (one_a, 1)]).unwrap();
        let k = pc.new_marking([(four, 1), (two_a, 1)]).unwrap();
        let m = pc.new_marking([(four_a, 1), (one_a, 1)]).unwrap();
        let r = pc.mult_by_power(k, m).unwrap();
        assert_eq!(pc.eval_marking(&r, 64).unwrap(), BigInt::from(192));
        pc.check_structure().unwrap();
    }

    #[test]
    fn consumed_handles_are_stale() {
        let mut pc = PowerCircuit::new(2).unwrap();
        let k = pc.const_marking(3).unwrap();
        let m = pc.const_marking(4).unwrap();
        let probe = Marking { circuit: k.circuit, slot: k.slot, gen: k.gen };
        let r = pc.add_markings(k, m).unwrap();
        assert_eq!(pc.digits(&probe).unwrap_err(), Error::StaleMarking);
        assert_eq!(pc.eval_marking(&r, 64).unwrap(), BigInt::from(7));
        let other = PowerCircuit::new(2).unwrap();
        assert_eq!(other.digits(&r).unwrap_err(), Error::CircuitMismatch);
    }

    #[test]
    fn const_marking_values() {
        let mut pc = PowerCircuit::new(2).unwrap();
        for n in [-7i64, 0, 1, 5, 1000] {
            let m = pc.const_marking(n).unwrap();
            assert_eq!(pc.eval_marking(&m, 64).unwrap(), BigInt::from(n));
        }
        let zero = pc.const_marking(0).unwrap();
        assert_eq!(pc.support_len(&zero).unwrap(), 0);
    }

    #[test]
    fn add_edge_rejects_cycles_and_multi_edges() {
        let mut pc = PowerCircuit::new(2).unwrap();
        let a = pc.add_node([]).unwrap();
        let b = pc.add_node([(a, 1)]).unwrap();
        assert_eq!(pc.add_edge(a, b, 1).unwrap_err(), Error::Cycle(a, b));
        assert_eq!(pc.add_edge(b, a, 1).unwrap_err(), Error::MultiEdge(b, a));
        assert!(matches!(pc.add_edge(b, a, 2), Err(Error::InvalidDigit { .. })));
    }

    #[test]
    fn operation_cost_is_independent_of_circuit_size() {
        let mut small = PowerCircuit::new(2).unwrap();
        let mut big = PowerCircuit::new(2).unwrap();
        for _ in 0..500 {
            big.add_node([]).unwrap();
        }
        let mut costs = Vec::new();
        for pc in [&mut small, &mut big] {
            let k = pc.const_marking(11).unwrap();
            let m = pc.const_marking(6).unwrap();
            let before = pc.work();
            let r = pc.add_markings(k, m).unwrap();
            let s = pc.const_marking(2).unwrap();
            let _ = pc.mult_by_power(r, s).unwrap();
            costs.push(pc.work() - before);
        }
        assert!(costs[1] <= costs[0] + 8, "costs {costs:?}");
    }
}
