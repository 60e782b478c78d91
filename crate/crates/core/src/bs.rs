//! Elements of the Baumslag–Solitar group `BS(1,q) = Z[1/q] ⋊ Z` encoded by
//! triples of markings, and the word-problem solver for the
//! Baumslag–Gersten group `BG(q)` built on them.
//!
//! A triple `[u, x, k]` with `x ≤ 0 ≤ k` stands for the pair
//! `(u·q^x, x + k)`, i.e. for `t^x a^u t^k`.  Keeping the negative and the
//! positive part of the exponent apart means every arithmetic step only ever
//! multiplies by a non-negative power of `q`.

use crate::circuit::Marking;
use crate::error::{Error, Result};
use crate::oracle::PairValue;
use crate::store::{Mode, Store};

/// A `BS(1,q)` element `[u, x, k]` living in the factor with index `factor`.
#[derive(Debug)]
pub struct Triple {
    pub u: Marking,
    pub x: Marking,
    pub k: Marking,
    pub factor: usize,
}

impl Triple {
    /// The neutral element.
    pub fn identity(s: &mut Store, factor: usize) -> Result<Triple> {
        Ok(Triple {
            u: s.zero()?,
            x: s.zero()?,
            k: s.zero()?,
            factor,
        })
    }

    /// `a^e = [e, 0, 0]`.
    pub fn a_pow(s: &mut Store, e: i64, factor: usize) -> Result<Triple> {
        Ok(Triple {
            u: s.constant(e)?,
            x: s.zero()?,
            k: s.zero()?,
            factor,
        })
    }

    /// `t^e`, i.e. `[0, 0, e]` for `e ≥ 0` and `[0, e, 0]` otherwise.
    pub fn t_pow(s: &mut Store, e: i64, factor: usize) -> Result<Triple> {
        let m = s.constant(e)?;
        let (x, k) = if e >= 0 { (s.zero()?, m) } else { (m, s.zero()?) };
        Ok(Triple {
            u: s.zero()?,
            x,
            k,
            factor,
        })
    }

    pub fn duplicate(&self, s: &mut Store) -> Result<Triple> {
        Ok(Triple {
            u: s.duplicate(&self.u)?,
            x: s.duplicate(&self.x)?,
            k: s.duplicate(&self.k)?,
            factor: self.factor,
        })
    }

    pub fn release(self, s: &mut Store) -> Result<()> {
        s.release(self.u)?;
        s.release(self.x)?;
        s.release(self.k)
    }

    /// Total support of the three markings.
    pub fn weight(&self, s: &Store) -> Result<usize> {
        Ok(s.support(&self.u)? + s.support(&self.x)? + s.support(&self.k)?)
    }

    /// Exact pair value (oracle; fails with `Overflow` on huge exponents).
    pub fn value(&self, s: &Store) -> Result<PairValue> {
        let (u, x, k) = (s.value(&self.u)?, s.value(&self.x)?, s.value(&self.k)?);
        PairValue::from_triple(s.q() as i64, &u, &x, &k)
    }
}

// ---------------------------------------------------------------------------
// Group operations
// ---------------------------------------------------------------------------

/// `[u,x,k]·[v,y,ℓ] = [u·q^{-y} + v·q^k, x + y, k + ℓ]`.
pub fn triple_mul(s: &mut Store, a: Triple, b: Triple) -> Result<Triple> {
    if a.factor != b.factor {
        let (fa, fb) = (a.factor, b.factor);
        a.release(s)?;
        b.release(s)?;
        return Err(Error::FactorMismatch(fa, fb));
    }
    let Triple { u, x, k, factor } = a;
    let Triple { u: v, x: y, k: l, .. } = b;
    let ny = s.duplicate(&y)?;
    s.negate(&ny)?;
    let left = s.mul_pow(u, ny)?;
    let kk = s.duplicate(&k)?;
    let right = s.mul_pow(v, kk)?;
    let u = s.add(left, right)?;
    let x = s.add(x, y)?;
    let k = s.add(k, l)?;
    Ok(Triple { u, x, k, factor })
}

/// `[u,x,k]^{-1} = [-u, -k, -x]`.
pub fn triple_inv(s: &mut Store, a: Triple) -> Result<Triple> {
    let Triple { u, x, k, factor } = a;
    s.negate(&u)?;
    s.negate(&x)?;
    s.negate(&k)?;
    Ok(Triple {
        u,
        x: k,
        k: x,
        factor,
    })
}

/// Membership in `⟨a⟩`: `x + k = 0` and `u·q^x ∈ Z`.
pub fn is_in_a(s: &Store, a: &Triple) -> Result<bool> {
    Ok(s.sums_to_zero(&a.x, &a.k)? && s.is_integral_scaled(&a.u, &a.x)?)
}

/// Membership in `⟨t⟩`: `u = 0`.
pub fn is_in_t(s: &Store, a: &Triple) -> Result<bool> {
    Ok(s.sign(&a.u)? == 0)
}

pub fn is_identity(s: &Store, a: &Triple) -> Result<bool> {
    Ok(s.sign(&a.u)? == 0 && s.sums_to_zero(&a.x, &a.k)?)
}

/// `a^m ↦ t^m` (the result keeps the factor index; callers relabel it).
pub fn swap_a_to_t(s: &mut Store, a: Triple) -> Result<Triple> {
    if !is_in_a(s, &a)? {
        a.release(s)?;
        return Err(Error::NotInSubgroup);
    }
    let Triple { u, x, k, factor } = a;
    s.release(k)?;
    // Every node of supp(u) has exponent at least -x, so the product stays a
    // valid power circuit.
    let m = s.mul_pow(u, x)?;
    let z = s.zero()?;
    let (x, k) = if s.sign(&m)? >= 0 { (s.zero()?, m) } else { (m, s.zero()?) };
    Ok(Triple { u: z, x, k, factor })
}

/// `t^m ↦ a^m`.
pub fn swap_t_to_a(s: &mut Store, a: Triple) -> Result<Triple> {
    if !is_in_t(s, &a)? {
        a.release(s)?;
        return Err(Error::NotInSubgroup);
    }
    let Triple { u, x, k, factor } = a;
    s.release(u)?;
    let m = s.add(x, k)?;
    Ok(Triple {
        u: m,
        x: s.zero()?,
        k: s.zero()?,
        factor,
    })
}

// ---------------------------------------------------------------------------
// Baumslag–Gersten groups
// ---------------------------------------------------------------------------

/// A letter of a word over `BG(q) = ⟨a, b | b a b^{-1} = t, t a t^{-1} = a^q⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BgLetter {
    /// `a^e`.
    A(i64),
    /// `b^e`.
    B(i64),
}

/// Measurements of one `BG(q)` run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BgStats {
    pub pinches: usize,
    pub max_depth: usize,
    pub max_weight: usize,
    pub nodes: usize,
}

/// Decides whether a word over `BG(q)` represents the identity.
pub fn bg_trivial(word: &[BgLetter], q: i64, mode: Mode) -> Result<bool> {
    bg_trivial_stats(word, q, mode).map(|(t, _)| t)
}

/// [`bg_trivial`] together with run measurements.
///
/// `BG(q)` is the HNN extension of `BS(1,q)` with stable letter `b`
/// conjugating `⟨a⟩` to `⟨t⟩`.  The word is read left to right onto a stack
/// `g_0 b^{ε_1} g_1 ⋯ b^{ε_k} g_k` of `BS(1,q)` elements; a pinch
/// `b g b^{-1}` (with `g ∈ ⟨a⟩`) or `b^{-1} g b` (with `g ∈ ⟨t⟩`) is
/// collapsed as soon as it appears, so the final stack is Britton-reduced.
pub fn bg_trivial_stats(word: &[BgLetter], q: i64, mode: Mode) -> Result<(bool, BgStats)> {
    let mut s = Store::new(q, mode)?;
    let mut stats = BgStats::default();
    let mut stack: Vec<(i8, Triple)> = vec![(0, Triple::identity(&mut s, 0)?)];
    for &letter in word {
        match letter {
            BgLetter::A(e) => {
                let (eps, g) = stack.pop().expect("stack never empty");
                let a = Triple::a_pow(&mut s, e, 0)?;
                stack.push((eps, triple_mul(&mut s, g, a)?));
            }
            BgLetter::B(e) => {
                let eps: i8 = if e >= 0 { 1 } else { -1 };
                for _ in 0..e.unsigned_abs() {
                    bg_push_b(&mut s, &mut stack, eps, &mut stats)?;
                }
            }
        }
        stats.max_depth = stats.max_depth.max(stack.len() - 1);
        stats.max_weight = stats.max_weight.max(s.weight());
    }
    stats.nodes = s.len();
    let trivial = stack.len() == 1 && is_identity(&s, &stack[0].1)?;
    Ok((trivial, stats))
}

fn bg_push_b(
    s: &mut Store,
    stack: &mut Vec<(i8, Triple)>,
    eps: i8,
    stats: &mut BgStats,
) -> Result<()> {
    let (top_eps, g) = stack.last().expect("stack never empty");
    let pinch = if stack.len() > 1 && *top_eps == -eps {
        if *top_eps == 1 {
            is_in_a(s, g)?
        } else {
            is_in_t(s, g)?
        }
    } else {
        false
    };
    if !pinch {
        let id = Triple::identity(s, 0)?;
        stack.push((eps, id));
        return Ok(());
    }
    let (top_eps, g) = stack.pop().expect("checked above");
    let h = if top_eps == 1 {
        swap_a_to_t(s, g)?
    } else {
        swap_t_to_a(s, g)?
    };
    let (below_eps, below) = stack.pop().expect("pinch needs two entries");
    stack.push((below_eps, triple_mul(s, below, h)?));
    stats.pinches += 1;
    Ok(())
}
