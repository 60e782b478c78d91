//! One facade over the two reduced representations.
//!
//! The group solvers only need a handful of operations on integer-valued
//! markings: constants, sums, products with powers of `q`, negation and
//! comparisons.  [`Store`] provides them on top of either a plain reduced
//! circuit (absorbing new nodes by binary search) or a treed circuit
//! (compact markings in a marking tree), and restores the reduced state
//! after every arithmetic operation.

use num_bigint::BigInt;

use crate::circuit::{Marking, DEFAULT_MAX_BITS};
use crate::error::Result;
use crate::reduce::{Ordering3, ReducedCircuit};
use crate::treed::TreedCircuit;

/// Which reduced representation backs a [`Store`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// Reduced circuit; markings are arbitrary digit vectors.
    Simple,
    /// Treed circuit; markings are compact and stored in a marking tree.
    #[default]
    Treed,
}

#[derive(Debug, Clone)]
enum Inner {
    Simple(ReducedCircuit),
    Treed(TreedCircuit),
}

/// Running totals for the amortized cost check: actual elementary steps,
/// the sum of the per-operation bounds, and the potential at the start and
/// now.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Accounting {
    pub operations: u64,
    pub actual: u64,
    pub bound: u64,
    pub potential_start: u64,
    pub potential_now: u64,
    /// Largest node growth of one normalization relative to its allowance.
    pub worst_growth_excess: i64,
}

impl Accounting {
    /// Whether `actual ≤ c·bound + Φ_start − Φ_now`.
    pub fn holds(&self, c: u64) -> bool {
        self.actual as i128 + self.potential_now as i128
            <= (c as i128) * self.bound as i128 + self.potential_start as i128
    }
}

/// Integer-valued markings over one reduced circuit.
#[derive(Debug, Clone)]
pub struct Store {
    inner: Inner,
    acct: Accounting,
}

impl Store {
    pub fn new(q: i64, mode: Mode) -> Result<Self> {
        let inner = match mode {
            Mode::Simple => Inner::Simple(ReducedCircuit::new(q)?),
            Mode::Treed => Inner::Treed(TreedCircuit::new(q)?),
        };
        Ok(Store {
            inner,
            acct: Accounting::default(),
        })
    }

    pub fn mode(&self) -> Mode {
        match self.inner {
            Inner::Simple(_) => Mode::Simple,
            Inner::Treed(_) => Mode::Treed,
        }
    }

    /// The underlying reduced circuit (read-only).
    pub fn circuit(&self) -> &ReducedCircuit {
        match &self.inner {
            Inner::Simple(rc) => rc,
            Inner::Treed(t) => t.reduced(),
        }
    }

    pub fn treed(&self) -> Option<&TreedCircuit> {
        match &self.inner {
            Inner::Simple(_) => None,
            Inner::Treed(t) => Some(t),
        }
    }

    pub fn q(&self) -> i32 {
        self.circuit().q()
    }

    /// `|Γ|`.
    pub fn len(&self) -> usize {
        self.circuit().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Total support of all live markings.
    pub fn weight(&self) -> usize {
        self.circuit().total_support()
    }

    pub fn accounting(&self) -> Accounting {
        self.acct
    }

    fn steps(&self) -> u64 {
        match &self.inner {
            Inner::Simple(rc) => rc.work(),
            Inner::Treed(t) => t.steps(),
        }
    }

    fn potential(&self) -> u64 {
        match &self.inner {
            Inner::Simple(_) => 0,
            Inner::Treed(t) => t.potential(),
        }
    }

    fn markings(&self) -> usize {
        self.circuit().marking_count()
    }

    /// Runs `f`, charging its actual steps against `bound(|Γ|, m)`.
    fn charged<T>(
        &mut self,
        bound: impl Fn(u64, u64) -> u64,
        f: impl FnOnce(&mut Self) -> Result<T>,
    ) -> Result<T> {
        if self.acct.operations == 0 {
            self.acct.potential_start = self.potential();
        }
        let (g, m) = (self.len() as u64, self.markings() as u64);
        let before = self.steps();
        let out = f(self)?;
        self.acct.operations += 1;
        self.acct.actual += self.steps() - before;
        self.acct.bound += bound(g, m);
        self.acct.potential_now = self.potential();
        Ok(out)
    }

    /// Absorbs pending nodes (and compacts new markings in treed mode).
    fn normalize(&mut self) -> Result<()> {
        let pending = self.circuit().pending().len() as u64;
        self.charged(
            |g, m| (g + pending + 1) * (pending + m + 1),
            |s| {
                match &mut s.inner {
                    Inner::Simple(rc) => {
                        let r = rc.extend_reduce()?;
                        let ex = r.growth as i64 - 2 * r.pending as i64;
                        s.acct.worst_growth_excess = s.acct.worst_growth_excess.max(ex);
                    }
                    Inner::Treed(t) => {
                        let r = t.extend_tree()?;
                        let ex = r.total_growth() as i64 - r.total_allowance() as i64;
                        s.acct.worst_growth_excess = s.acct.worst_growth_excess.max(ex);
                    }
                }
                Ok(())
            },
        )
    }

    // -----------------------------------------------------------------------
    // Markings
    // -----------------------------------------------------------------------

    /// A marking of value `n`.
    pub fn constant(&mut self, n: i64) -> Result<Marking> {
        // The input size is the number of base-q digits of n.
        let q = self.q() as u64;
        let mut len = 1u64;
        let mut rest = n.unsigned_abs();
        while rest >= q {
            rest /= q;
            len += 1;
        }
        self.charged(
            move |g, m| g + m + len,
            |s| match &mut s.inner {
                Inner::Simple(rc) => rc.const_marking(n),
                Inner::Treed(t) => t.const_marking(n),
            },
        )
    }

    /// The empty marking (value 0).
    pub fn zero(&mut self) -> Result<Marking> {
        match &mut self.inner {
            Inner::Simple(rc) => rc.new_marking([]),
            Inner::Treed(t) => t.new_marking([]),
        }
    }

    /// A second handle with the same value.
    pub fn duplicate(&mut self, m: &Marking) -> Result<Marking> {
        match &mut self.inner {
            Inner::Simple(rc) => rc.duplicate(m),
            Inner::Treed(t) => t.duplicate(m),
        }
    }

    pub fn release(&mut self, m: Marking) -> Result<()> {
        match &mut self.inner {
            Inner::Simple(rc) => rc.release(m).map(drop),
            Inner::Treed(t) => t.release(m).map(drop),
        }
    }

    /// `e(K) + e(M)`, consuming both.
    pub fn add(&mut self, k: Marking, m: Marking) -> Result<Marking> {
        if self.support(&m)? == 0 {
            self.release(m)?;
            return Ok(k);
        }
        if self.support(&k)? == 0 {
            self.release(k)?;
            return Ok(m);
        }
        let r = match &mut self.inner {
            Inner::Simple(rc) => rc.add_markings(k, m)?,
            Inner::Treed(t) => t.add_markings(k, m)?,
        };
        self.normalize()?;
        Ok(r)
    }

    /// `e(K) - e(M)`, consuming both.
    pub fn sub(&mut self, k: Marking, m: Marking) -> Result<Marking> {
        self.negate(&m)?;
        self.add(k, m)
    }

    /// `e(K)·q^e(M)`, consuming both; requires `e(M) ≥ 0`.
    pub fn mul_pow(&mut self, k: Marking, m: Marking) -> Result<Marking> {
        if self.support(&m)? == 0 || self.support(&k)? == 0 {
            self.release(m)?;
            return Ok(k);
        }
        let r = match &mut self.inner {
            Inner::Simple(rc) => rc.mult_by_power(k, m)?,
            Inner::Treed(t) => t.mult_by_power(k, m)?,
        };
        self.normalize()?;
        Ok(r)
    }

    pub fn negate(&mut self, m: &Marking) -> Result<()> {
        match &mut self.inner {
            Inner::Simple(rc) => rc.negate(m),
            Inner::Treed(t) => t.negate(m),
        }
    }

    // -----------------------------------------------------------------------
    // Queries
    // -----------------------------------------------------------------------

    pub fn sign(&self, m: &Marking) -> Result<i32> {
        self.circuit().sign_of(m)
    }

    pub fn compare(&self, a: &Marking, b: &Marking) -> Result<Ordering3> {
        self.circuit().compare(a, b)
    }

    /// Whether `e(A) + e(B) = 0`.
    pub fn sums_to_zero(&self, a: &Marking, b: &Marking) -> Result<bool> {
        let o = self.circuit().compare_signed(a, 1, b, -1)?;
        Ok(o.ord == std::cmp::Ordering::Equal)
    }

    /// Whether `q^(-e(X))` divides `e(U)`, i.e. `e(U)·q^e(X)` is an integer.
    pub fn is_integral_scaled(&self, u: &Marking, x: &Marking) -> Result<bool> {
        self.circuit().is_divisible_by_signed_power(u, x, -1)
    }

    pub fn support(&self, m: &Marking) -> Result<usize> {
        self.circuit().support_len(m)
    }

    /// Exact value (oracle; fails with `Overflow` on huge values).
    pub fn value(&self, m: &Marking) -> Result<BigInt> {
        self.circuit().eval_marking(m, DEFAULT_MAX_BITS)
    }

    /// Exact value with a custom bit budget.
    pub fn value_bits(&self, m: &Marking, max_bits: u64) -> Result<BigInt> {
        self.circuit().eval_marking(m, max_bits)
    }

    /// Full invariant check of the backing circuit.
    pub fn check(&self) -> Result<()> {
        match &self.inner {
            Inner::Simple(rc) => rc.check_invariants(),
            Inner::Treed(t) => t.check_invariants(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_modes_agree_on_small_arithmetic() {
        for mode in [Mode::Simple, Mode::Treed] {
            let mut s = Store::new(2, mode).unwrap();
            let a = s.constant(3).unwrap();
            let b = s.constant(4).unwrap();
            let p = s.mul_pow(a, b).unwrap();
            assert_eq!(s.value(&p).unwrap(), BigInt::from(48));
            let c = s.constant(-48).unwrap();
            assert!(s.sums_to_zero(&p, &c).unwrap());
            let z = s.add(p, c).unwrap();
            assert_eq!(s.sign(&z).unwrap(), 0);
            s.check().unwrap();
        }
    }

    #[test]
    fn integrality_of_scaled_values() {
        let mut s = Store::new(3, Mode::Treed).unwrap();
        let u = s.constant(18).unwrap();
        let x2 = s.constant(-2).unwrap();
        let x3 = s.constant(-3).unwrap();
        assert!(s.is_integral_scaled(&u, &x2).unwrap());
        assert!(!s.is_integral_scaled(&u, &x3).unwrap());
        let z = s.zero().unwrap();
        assert!(s.is_integral_scaled(&z, &x3).unwrap());
    }
}
