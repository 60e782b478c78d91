//! Word problem of the generalized Higman groups
//! `H_f(1,q) = ⟨a_1, …, a_f | a_{i+1} a_i a_{i+1}^{-1} = a_i^q (i mod f)⟩`.
//!
//! `H_f` is an amalgamated product of two groups `G_{1,…,e}` (a chain of
//! Baumslag–Solitar groups `G_{i,i+1} = ⟨a_i, a_{i+1}⟩`) along the free
//! subgroup generated by their two end generators.  Words are split into
//! blocks over either side, each block is brought into a normal form by
//! local rewriting rules on sequences of triples, and blocks lying in the
//! amalgamated subgroup are moved across until no such block remains.
//!
//! Subscripts below are local to a block: a pair with subscript `i`
//! (`1 ≤ i < e`) lives in `G_{i,i+1}`, where `a_i = (1,0)_i` and
//! `a_{i+1} = (0,1)_i`.

use crate::bs::{is_identity, is_in_a, is_in_t, swap_a_to_t, swap_t_to_a, triple_mul, Triple};
use crate::error::{Error, Result};
use crate::store::{Mode, Store};

/// `a_gen^exp`, with `gen` in `1..=f`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HLetter {
    pub gen: usize,
    pub exp: i64,
}

/// The two sides of the amalgam: `Left` covers `a_1 … a_{f-1}`, `Right`
/// covers `a_{f-1}, a_f, a_1` (locally numbered 1, 2, 3).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// A maximal subword over one side, as a sequence of triples.
#[derive(Debug)]
pub struct Block {
    pub side: Side,
    pub pairs: Vec<Triple>,
}

/// Measurements of one run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HigmanStats {
    /// Total support of all markings right after encoding the input.
    pub initial_weight: usize,
    /// Largest total support observed at any checkpoint.
    pub max_weight: usize,
    /// Applications of the merging rules on neighbouring pairs.
    pub l_rules: usize,
    /// Applications of the two long-range rules.
    pub fold_rules: usize,
    /// Blocks moved into a neighbour.
    pub swaps: usize,
    /// Final `|Γ|`.
    pub nodes: usize,
}

/// Rewriting context: a marking store plus the block length `e` of each side.
pub struct Higman {
    pub store: Store,
    pub f: usize,
    pub stats: HigmanStats,
}

impl Higman {
    pub fn new(q: i64, f: usize, mode: Mode) -> Result<Self> {
        if f < 4 {
            return Err(Error::MalformedWord(format!("need f >= 4, got {f}")));
        }
        Ok(Higman {
            store: Store::new(q, mode)?,
            f,
            stats: HigmanStats::default(),
        })
    }

    /// Number of generators of one side's chain.
    pub fn e_of(&self, side: Side) -> usize {
        match side {
            Side::Left => self.f - 1,
            Side::Right => 3,
        }
    }

    fn observe(&mut self) {
        self.stats.max_weight = self.stats.max_weight.max(self.store.weight());
    }

    // -----------------------------------------------------------------------
    // Encoding
    // -----------------------------------------------------------------------

    /// Splits a word into maximal blocks, one triple per letter.
    pub fn encode(&mut self, word: &[HLetter]) -> Result<Vec<Block>> {
        let f = self.f;
        let mut blocks: Vec<Block> = Vec::new();
        for &HLetter { gen, exp } in word {
            if gen == 0 || gen > f {
                return Err(Error::MalformedWord(format!("generator a{gen} with f = {f}")));
            }
            if exp == 0 {
                continue;
            }
            let (side, local) = if gen <= f - 2 {
                (Side::Left, gen)
            } else {
                (Side::Right, gen - (f - 2))
            };
            let t = Triple::a_pow(&mut self.store, exp, local)?;
            match blocks.last_mut() {
                Some(b) if b.side == side => b.pairs.push(t),
                _ => blocks.push(Block {
                    side,
                    pairs: vec![t],
                }),
            }
        }
        self.stats.initial_weight = self.store.weight();
        self.observe();
        Ok(blocks)
    }

    // -----------------------------------------------------------------------
    // Neighbour rules
    // -----------------------------------------------------------------------

    /// Merges two neighbouring pairs into one if one of the local rules
    /// applies; otherwise hands both back unchanged.
    pub fn combine(&mut self, l: Triple, r: Triple) -> Result<Result<Triple, (Triple, Triple)>> {
        let s = &mut self.store;
        let (i, j) = (l.factor, r.factor);
        let out = if i == j {
            triple_mul(s, l, r)?
        } else if j == i + 1 {
            if is_in_a(s, &r)? {
                let mut r = swap_a_to_t(s, r)?;
                r.factor = i;
                triple_mul(s, l, r)?
            } else if is_in_t(s, &l)? {
                let mut l = swap_t_to_a(s, l)?;
                l.factor = j;
                triple_mul(s, l, r)?
            } else {
                return Ok(Err((l, r)));
            }
        } else if i == j + 1 {
            if is_in_a(s, &l)? {
                let mut l = swap_a_to_t(s, l)?;
                l.factor = j;
                triple_mul(s, l, r)?
            } else if is_in_t(s, &r)? {
                let mut r = swap_t_to_a(s, r)?;
                r.factor = i;
                triple_mul(s, l, r)?
            } else {
                return Ok(Err((l, r)));
            }
        } else {
            return Ok(Err((l, r)));
        };
        self.stats.l_rules += 1;
        Ok(Ok(out))
    }

    /// Applies the neighbour rules until none applies; identity pairs are
    /// dropped on sight.
    pub fn l_reduce(&mut self, pairs: Vec<Triple>) -> Result<Vec<Triple>> {
        let mut out: Vec<Triple> = Vec::with_capacity(pairs.len());
        for p in pairs {
            let mut cur = p;
            loop {
                if is_identity(&self.store, &cur)? {
                    cur.release(&mut self.store)?;
                    break;
                }
                let Some(prev) = out.pop() else {
                    out.push(cur);
                    break;
                };
                match self.combine(prev, cur)? {
                    Ok(merged) => cur = merged,
                    Err((prev, cur)) => {
                        out.push(prev);
                        out.push(cur);
                        break;
                    }
                }
            }
        }
        self.observe();
        Ok(out)
    }

    // -----------------------------------------------------------------------
    // Long-range rules
    // -----------------------------------------------------------------------

    /// `(x_1, x_2)_1 (x̃_2, x_3)_2 ⋯ (x̃_{e-1}, x_e)_{e-1}` with
    /// `x_2 + x̃_2 = 0, …` collapsing to `(x_1, 0)_1 (·, x_e)_{e-1}`: the
    /// `t`-part of each pair is carried rightwards as an `a`-power of the
    /// next factor.
    fn fold_up(&mut self, run: &[Triple], e: usize) -> Result<Option<(Triple, Triple)>> {
        let s = &mut self.store;
        let p1 = &run[0];
        if s.sign(&p1.u)? == 0 || s.sums_to_zero(&p1.x, &p1.k)? {
            return Ok(None);
        }
        let (x, k) = (s.duplicate(&p1.x)?, s.duplicate(&p1.k)?);
        let mut carry = Triple {
            u: s.add(x, k)?,
            x: s.zero()?,
            k: s.zero()?,
            factor: 2,
        };
        for p in &run[1..e - 2] {
            let d = p.duplicate(s)?;
            let t = triple_mul(s, carry, d)?;
            if !is_in_t(s, &t)? || is_identity(s, &t)? {
                t.release(s)?;
                return Ok(None);
            }
            let f = t.factor + 1;
            carry = swap_t_to_a(s, t)?;
            carry.factor = f;
        }
        let d = run[e - 2].duplicate(s)?;
        let last = triple_mul(s, carry, d)?;
        if s.sums_to_zero(&last.x, &last.k)? {
            last.release(s)?;
            return Ok(None);
        }
        let x = s.duplicate(&p1.x)?;
        let nx = s.duplicate(&p1.x)?;
        s.negate(&nx)?;
        let first = Triple {
            u: s.duplicate(&p1.u)?,
            x,
            k: nx,
            factor: 1,
        };
        Ok(Some((first, last)))
    }

    /// The mirror image: `(x_{e-1}, x_e)_{e-1} ⋯ (x_1, x_2)_1` collapsing to
    /// `(0, x_e)_{e-1} (x_1, ·)_1`, carrying `a`-parts leftwards as
    /// `t`-powers of the previous factor.
    fn fold_down(&mut self, run: &[Triple], e: usize) -> Result<Option<(Triple, Triple)>> {
        let s = &mut self.store;
        let p1 = &run[0];
        if s.sign(&p1.u)? == 0 || s.sums_to_zero(&p1.x, &p1.k)? {
            return Ok(None);
        }
        // (u q^x, x + k) = (0, x + k) · (u q^{-k}, 0); the second factor
        // must be an integral power of a_{e-1}.
        let k1 = s.duplicate(&p1.k)?;
        let nk = s.duplicate(&p1.k)?;
        s.negate(&nk)?;
        let head = Triple {
            u: s.duplicate(&p1.u)?,
            x: nk,
            k: k1,
            factor: e - 1,
        };
        if !is_in_a(s, &head)? {
            head.release(s)?;
            return Ok(None);
        }
        let mut carry = swap_a_to_t(s, head)?;
        carry.factor = e - 2;
        for p in &run[1..e - 2] {
            let d = p.duplicate(s)?;
            let t = triple_mul(s, carry, d)?;
            if !is_in_a(s, &t)? || is_identity(s, &t)? {
                t.release(s)?;
                return Ok(None);
            }
            let f = t.factor - 1;
            carry = swap_a_to_t(s, t)?;
            carry.factor = f;
        }
        let d = run[e - 2].duplicate(s)?;
        let last = triple_mul(s, carry, d)?;
        if s.sign(&last.u)? == 0 {
            last.release(s)?;
            return Ok(None);
        }
        let first = Triple {
            u: s.zero()?,
            x: s.duplicate(&p1.x)?,
            k: s.duplicate(&p1.k)?,
            factor: e - 1,
        };
        Ok(Some((first, last)))
    }

    /// One left-to-right pass of the long-range rules.  Returns the new
    /// sequence and whether anything changed.
    fn fold_pass(&mut self, pairs: Vec<Triple>, e: usize) -> Result<(Vec<Triple>, bool)> {
        let n = e - 1;
        let mut pairs: Vec<Option<Triple>> = pairs.into_iter().map(Some).collect();
        let mut out: Vec<Triple> = Vec::with_capacity(pairs.len());
        let mut changed = false;
        let mut p = 0;
        while p < pairs.len() {
            if p + n <= pairs.len() {
                let run: Vec<&Triple> = pairs[p..p + n].iter().map(|t| t.as_ref().unwrap()).collect();
                let up = run.iter().enumerate().all(|(j, t)| t.factor == j + 1);
                let down = run.iter().enumerate().all(|(j, t)| t.factor == n - j);
                let result = if up || down {
                    let owned: Vec<Triple> = pairs[p..p + n]
                        .iter_mut()
                        .map(|t| t.take().unwrap())
                        .collect();
                    let r = if up {
                        self.fold_up(&owned, e)?
                    } else {
                        self.fold_down(&owned, e)?
                    };
                    match r {
                        Some(pair) => {
                            for t in owned {
                                t.release(&mut self.store)?;
                            }
                            Some(pair)
                        }
                        None => {
                            for (slot, t) in pairs[p..p + n].iter_mut().zip(owned) {
                                *slot = Some(t);
                            }
                            None
                        }
                    }
                } else {
                    None
                };
                if let Some((first, second)) = result {
                    self.stats.fold_rules += 1;
                    changed = true;
                    out.push(first);
                    // The second pair may start the next run.
                    pairs[p + n - 1] = Some(second);
                    p += n - 1;
                    self.observe();
                    continue;
                }
            }
            out.push(pairs[p].take().unwrap());
            p += 1;
        }
        Ok((out, changed))
    }

    /// Alternates neighbour reduction and long-range passes until stable.
    pub fn l_prime_reduce(&mut self, pairs: Vec<Triple>, e: usize) -> Result<Vec<Triple>> {
        let mut pairs = self.l_reduce(pairs)?;
        loop {
            let (next, changed) = self.fold_pass(pairs, e)?;
            pairs = self.l_reduce(next)?;
            if !changed {
                return Ok(pairs);
            }
        }
    }

    // -----------------------------------------------------------------------
    // Amalgamation
    // -----------------------------------------------------------------------

    /// Whether a reduced sequence lies in `⟨a_1, a_e⟩`: every pair is an
    /// `a_1`-power in factor 1 or an `a_e`-power in factor `e-1`.
    pub fn in_subgroup(&self, pairs: &[Triple], e: usize) -> Result<bool> {
        for p in pairs {
            let ok = (p.factor == 1 && is_in_a(&self.store, p)?)
                || (p.factor == e - 1 && is_in_t(&self.store, p)?);
            if !ok {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Rewrites a subgroup sequence over the other side (`a_1 ↔ a_e` of one
    /// side is `a_e ↔ a_1` of the other).
    pub fn swap_block(&mut self, pairs: Vec<Triple>, e_from: usize, e_to: usize) -> Result<Vec<Triple>> {
        let s = &mut self.store;
        let mut out = Vec::with_capacity(pairs.len());
        for p in pairs {
            let t = if p.factor == 1 && is_in_a(s, &p)? {
                let mut t = swap_a_to_t(s, p)?;
                t.factor = e_to - 1;
                t
            } else if p.factor == e_from - 1 && is_in_t(s, &p)? {
                let mut t = swap_t_to_a(s, p)?;
                t.factor = 1;
                t
            } else {
                p.release(s)?;
                return Err(Error::NotInSubgroup);
            };
            out.push(t);
        }
        self.stats.swaps += 1;
        Ok(out)
    }

    fn reduce_block(&mut self, b: Block) -> Result<Block> {
        let e = self.e_of(b.side);
        let pairs = self.l_prime_reduce(b.pairs, e)?;
        Ok(Block { side: b.side, pairs })
    }

    /// Appends block `b` to block `a` (converting `b` if it lies on the
    /// other side).
    fn absorb(&mut self, a: Block, b: Block) -> Result<Block> {
        let mut pairs = a.pairs;
        let tail = if a.side == b.side {
            b.pairs
        } else {
            let (ef, et) = (self.e_of(b.side), self.e_of(a.side));
            self.swap_block(b.pairs, ef, et)?
        };
        pairs.extend(tail);
        Ok(Block { side: a.side, pairs })
    }

    /// Moves subgroup blocks into their neighbours until every block is
    /// reduced and outside the subgroup; the word is trivial iff no block
    /// remains.
    pub fn solve(&mut self, mut blocks: Vec<Block>) -> Result<bool> {
        let mut t = 0usize;
        loop {
            let s = blocks.len();
            if t == 0 {
                if s == 0 {
                    break;
                }
                let b = self.reduce_block(blocks.remove(0))?;
                if b.pairs.is_empty() {
                    continue;
                }
                let e = self.e_of(b.side);
                if s > 1 && self.in_subgroup(&b.pairs, e)? {
                    let next = blocks.remove(0);
                    let (side, pairs) = (next.side, b.pairs);
                    let swapped = if side == b.side {
                        pairs
                    } else {
                        self.swap_block(pairs, e, self.e_of(side))?
                    };
                    let mut merged = swapped;
                    merged.extend(next.pairs);
                    blocks.insert(0, Block { side, pairs: merged });
                    continue;
                }
                blocks.insert(0, b);
                t = 1;
                continue;
            }
            if t >= s {
                break;
            }
            // blocks[..t] are reduced and outside the subgroup.
            if blocks[t - 1].side == blocks[t].side {
                let b = blocks.remove(t);
                let a = blocks.remove(t - 1);
                let merged = self.absorb(a, b)?;
                blocks.insert(t - 1, merged);
                t -= 1;
                continue;
            }
            let b = self.reduce_block(blocks.remove(t))?;
            if b.pairs.is_empty() {
                continue;
            }
            if self.in_subgroup(&b.pairs, self.e_of(b.side))? {
                let a = blocks.remove(t - 1);
                let merged = self.absorb(a, b)?;
                blocks.insert(t - 1, merged);
                t -= 1;
                continue;
            }
            blocks.insert(t, b);
            t += 1;
        }
        self.observe();
        self.stats.nodes = self.store.len();
        let trivial = blocks.is_empty();
        for b in blocks {
            for p in b.pairs {
                p.release(&mut self.store)?;
            }
        }
        Ok(trivial)
    }
}

/// Decides whether a word over `H_f(1,q)` represents the identity.
pub fn higman_trivial(word: &[HLetter], q: i64, f: usize, mode: Mode) -> Result<bool> {
    higman_trivial_stats(word, q, f, mode).map(|(t, _)| t)
}

/// [`higman_trivial`] together with run measurements.
pub fn higman_trivial_stats(
    word: &[HLetter],
    q: i64,
    f: usize,
    mode: Mode,
) -> Result<(bool, HigmanStats)> {
    let mut h = Higman::new(q, f, mode)?;
    let blocks = h.encode(word)?;
    let trivial = h.solve(blocks)?;
    Ok((trivial, h.stats))
}
