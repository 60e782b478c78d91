//! Exact arithmetic in `Z[1/q] ⋊ Z`, used as an independent oracle for the
//! circuit-based group operations.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Largest `|k|` for which `q^k` is materialized.
const MAX_SHIFT: u64 = 1 << 16;

/// The pair `(u, k)` with `u ∈ Z[1/q]`, `k ∈ Z`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairValue {
    pub u: BigRational,
    pub k: BigInt,
}

fn pow_q(q: i64, k: &BigInt) -> Result<BigRational> {
    let e = k.abs().to_u64().filter(|&e| e <= MAX_SHIFT).ok_or(Error::Overflow(MAX_SHIFT))?;
    let p = num_traits::pow(BigInt::from(q), e as usize);
    Ok(if k.is_negative() {
        BigRational::new(BigInt::one(), p)
    } else {
        BigRational::from_integer(p)
    })
}

impl PairValue {
    pub fn new(u: BigRational, k: BigInt) -> Self {
        PairValue { u, k }
    }

    pub fn identity() -> Self {
        PairValue::new(BigRational::zero(), BigInt::zero())
    }

    /// `a^e = (e, 0)`.
    pub fn a_pow(e: i64) -> Self {
        PairValue::new(BigRational::from_integer(e.into()), BigInt::zero())
    }

    /// `t^e = (0, e)`.
    pub fn t_pow(e: i64) -> Self {
        PairValue::new(BigRational::zero(), e.into())
    }

    /// `(u, k)(v, ℓ) = (u + v·q^k, k + ℓ)`.
    pub fn mul(&self, other: &PairValue, q: i64) -> Result<PairValue> {
        let u = &self.u + &other.u * pow_q(q, &self.k)?;
        Ok(PairValue::new(u, &self.k + &other.k))
    }

    /// `(u, k)^{-1} = (-u·q^{-k}, -k)`.
    pub fn inv(&self, q: i64) -> Result<PairValue> {
        let u = -&self.u * pow_q(q, &-&self.k)?;
        Ok(PairValue::new(u, -&self.k))
    }

    pub fn is_identity(&self) -> bool {
        self.u.is_zero() && self.k.is_zero()
    }

    /// Membership in `⟨a⟩`: `k = 0` and `u ∈ Z`.
    pub fn is_in_a(&self) -> bool {
        self.k.is_zero() && self.u.is_integer()
    }

    /// Membership in `⟨t⟩`: `u = 0`.
    pub fn is_in_t(&self) -> bool {
        self.u.is_zero()
    }

    /// The value of a triple `[u, x, k] = (u·q^x, x + k)`.
    pub fn from_triple(q: i64, u: &BigInt, x: &BigInt, k: &BigInt) -> Result<PairValue> {
        let uu = BigRational::from_integer(u.clone()) * pow_q(q, x)?;
        Ok(PairValue::new(uu, x + k))
    }
}
