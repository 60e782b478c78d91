//! Signed-digit power sums `Σ α_i·q^i` with `α_i ∈ D`, the rewriting system
//! that defines compact sums, and linear-time compactification.
//!
//! A sum is compact when none of the following rules applies (`i < j`):
//!
//! 1. `α·q^i + β·q^{i+1} → (α-q)·q^i + (β+1)·q^{i+1}` for `α > 0, β < 0`
//! 2. `α·q^i + β·q^{i+1} → (α+q)·q^i + (β-1)·q^{i+1}` for `α < 0, β > 0`
//! 3. `α·q^i + (q-1)(q^{i+1}+…+q^j) + β·q^{j+1} → (α-q)·q^i + (β+1)·q^{j+1}`
//!    for `α > 0, β < q-1`
//! 4. the mirror image of 3 for `α < 0, β > -q+1`.
//!
//! Compact sums are unique per value, have the fewest nonzero digits, and
//! their lexicographic order (most significant digit first) is the value
//! order.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::circuit::{Base, Digit};
use crate::error::{Error, Result};

/// A power sum with dense little-endian coefficients.  Trailing zeros are
/// allowed and ignored by comparisons.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PowerSum {
    base: Base,
    coeffs: Vec<Digit>,
}

/// A place where a rule of the rewriting system applies.  For rules 1 and 2
/// `j == i`; for rules 3 and 4 the run of `±(q-1)` covers `i+1..=j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Redex {
    pub rule: u8,
    pub i: usize,
    pub j: usize,
}

impl PowerSum {
    pub fn new(q: i64, coeffs: Vec<i64>) -> Result<Self> {
        let base = Base::new(q)?;
        let coeffs = coeffs.into_iter().map(|c| base.check(c)).collect::<Result<_>>()?;
        Ok(PowerSum { base, coeffs })
    }

    pub(crate) fn from_digits(base: Base, coeffs: Vec<Digit>) -> Self {
        debug_assert!(coeffs.iter().all(|&c| base.contains(i64::from(c))));
        PowerSum { base, coeffs }
    }

    pub fn zero(q: i64) -> Result<Self> {
        Self::new(q, Vec::new())
    }

    pub fn q(&self) -> Digit {
        self.base.q()
    }

    pub fn coeffs(&self) -> &[Digit] {
        &self.coeffs
    }

    /// Coefficient at exponent `i` (zero beyond the stored range).
    pub fn coeff(&self, i: usize) -> Digit {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    /// Coefficients without trailing zeros.
    pub fn trimmed(&self) -> &[Digit] {
        let end = self.coeffs.iter().rposition(|&c| c != 0).map_or(0, |p| p + 1);
        &self.coeffs[..end]
    }

    pub fn nonzero_count(&self) -> usize {
        self.coeffs.iter().filter(|&&c| c != 0).count()
    }

    /// Exact value.
    pub fn value(&self) -> BigInt {
        let q = BigInt::from(self.q());
        let mut v = BigInt::zero();
        for &c in self.coeffs.iter().rev() {
            v = v * &q + c;
        }
        v
    }

    fn grow_to(&mut self, len: usize) {
        if self.coeffs.len() < len {
            self.coeffs.resize(len, 0);
        }
    }

    // -----------------------------------------------------------------------
    // Rewriting
    // -----------------------------------------------------------------------

    /// Whether `rule` applies at `(i, j)`.
    pub fn rule_applies(&self, rule: u8, i: usize, j: usize) -> bool {
        let top = self.base.max_digit();
        let a = self.coeff(i);
        match rule {
            1 => j == i && a > 0 && self.coeff(i + 1) < 0,
            2 => j == i && a < 0 && self.coeff(i + 1) > 0,
            3 | 4 => {
                let s = if rule == 3 { 1 } else { -1 };
                j > i
                    && s * a > 0
                    && (i + 1..=j).all(|l| self.coeff(l) == s * top)
                    && s * self.coeff(j + 1) < top
            }
            _ => false,
        }
    }

    /// Applies one rule; the value is unchanged.
    pub fn apply_rule(&self, rule: u8, i: usize, j: usize) -> Result<PowerSum> {
        if !self.rule_applies(rule, i, j) {
            return Err(Error::RuleNotApplicable { rule, at: i });
        }
        let q = self.q();
        let mut out = self.clone();
        out.grow_to(j + 2);
        let s = if rule == 1 || rule == 3 { 1 } else { -1 };
        out.coeffs[i] -= s * q;
        for l in i + 1..=j {
            if rule >= 3 {
                out.coeffs[l] = 0;
            }
        }
        out.coeffs[j + 1] += s;
        Ok(out)
    }

    /// All places where some rule applies, ordered by position then rule.
    pub fn redexes(&self) -> Vec<Redex> {
        let top = self.base.max_digit();
        let t = self.trimmed().len();
        let mut out = Vec::new();
        for i in 0..t {
            let a = self.coeff(i);
            if a == 0 {
                continue;
            }
            for rule in [1u8, 2] {
                if self.rule_applies(rule, i, i) {
                    out.push(Redex { rule, i, j: i });
                }
            }
            let s = a.signum();
            let mut j = i;
            while self.coeff(j + 1) == s * top {
                j += 1;
            }
            if j > i {
                // every shorter run is followed by another ±(q-1), so only
                // the full run is a redex
                let rule = if s > 0 { 3 } else { 4 };
                if self.rule_applies(rule, i, j) {
                    out.push(Redex { rule, i, j });
                }
            }
        }
        out
    }

    /// No rule applies anywhere.
    pub fn is_compact(&self) -> bool {
        let top = self.base.max_digit();
        let c = self.trimmed();
        c.windows(2).all(|w| {
            let (a, b) = (w[0], w[1]);
            a.signum() * b.signum() != -1 && !(a > 0 && b == top) && !(a < 0 && b == -top)
        })
    }

    /// Normalizes by repeatedly applying the leftmost redex.  Returns the
    /// normal form and the number of steps, or `None` if `budget` steps did
    /// not suffice.
    pub fn normalize_leftmost(&self, budget: usize) -> Option<(PowerSum, usize)> {
        let mut cur = self.clone();
        for steps in 0..=budget {
            match cur.redexes().first() {
                None => return Some((cur, steps)),
                Some(r) => cur = cur.apply_rule(r.rule, r.i, r.j).expect("listed redex"),
            }
        }
        None
    }

    // -----------------------------------------------------------------------
    // Order and increments
    // -----------------------------------------------------------------------

    /// Lexicographic comparison of two compact sums, most significant
    /// coefficient first.
    pub fn cmp_lex(&self, other: &PowerSum) -> Result<Ordering> {
        if !self.is_compact() || !other.is_compact() {
            return Err(Error::NotCompact);
        }
        Ok(lex(&self.coeffs, &other.coeffs))
    }

    /// Whether `e(other) = e(self) + 1`, decided from the digit shapes.
    pub fn is_increment(&self, other: &PowerSum) -> Result<bool> {
        if !self.is_compact() || !other.is_compact() {
            return Err(Error::NotCompact);
        }
        Ok(is_increment_digits(self.base, &self.coeffs, &other.coeffs))
    }
}

pub(crate) fn lex(a: &[Digit], b: &[Digit]) -> Ordering {
    let n = a.len().max(b.len());
    for i in (0..n).rev() {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        match x.cmp(&y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

pub(crate) fn is_increment_digits(base: Base, s: &[Digit], t: &[Digit]) -> bool {
    let top = base.max_digit();
    let n = s.len().max(t.len());
    let at = |v: &[Digit], i: usize| v.get(i).copied().unwrap_or(0);
    let Some(i) = (0..n).rev().find(|&i| at(s, i) != at(t, i)) else {
        return false;
    };
    if at(t, i) != at(s, i) + 1 {
        return false;
    }
    (0..i).all(|j| {
        let (a, b) = (at(s, j), at(t, j));
        (a == top && b == 0) || (a == 0 && b == -top)
    })
}

// ---------------------------------------------------------------------------
// Compactification
// ---------------------------------------------------------------------------

/// Index of a carry value `J ∈ {-1, 0, +1}` into table rows.
#[inline]
fn ix(j: i8) -> usize {
    (j + 1) as usize
}

/// Tie-breaking preference among feasible carries.
const PREFERENCE: [i8; 3] = [0, -1, 1];

/// Per-step feasibility sets: `cells[i][j][k]` is a bit set over
/// `{-1, 0, +1}` of the values `J_i` admissible when `J_{i-2} = j` and
/// `J_{i-1} = k`, for `i = 2, …, n + 2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CarryTable {
    first: usize,
    cells: Vec<[[u8; 3]; 3]>,
}

impl CarryTable {
    /// The set `𝒥_i[j, k]` as a sorted vector.
    pub fn cell(&self, i: usize, j: i8, k: i8) -> Vec<i8> {
        let Some(col) = i.checked_sub(self.first).and_then(|c| self.cells.get(c)) else {
            return Vec::new();
        };
        let mask = col[ix(j)][ix(k)];
        [-1i8, 0, 1].into_iter().filter(|&l| mask & (1 << ix(l)) != 0).collect()
    }

    /// Column indices covered, `2..=n+2`.
    pub fn columns(&self) -> std::ops::RangeInclusive<usize> {
        self.first..=self.first + self.cells.len() - 1
    }
}

/// Output of [`compactify_with_table`].
#[derive(Debug, Clone)]
pub struct Compactified {
    pub sum: PowerSum,
    /// Carries `J_0, …, J_{n+2}`.
    pub carries: Vec<i8>,
    pub table: CarryTable,
    /// Number of table cells evaluated.
    pub steps: usize,
}

/// The compact sum of equal value; allocates one extra coefficient slot.
pub fn compactify(s: &PowerSum) -> PowerSum {
    compactify_with_table(s).sum
}

/// Compactification by one forward pass filling the carry table and one
/// backward pass reading off the carries, with
/// `β_i = α_i + J_i - q·J_{i+1}`.
pub fn compactify_with_table(s: &PowerSum) -> Compactified {
    let q = i64::from(s.q());
    let n = s.coeffs.len().saturating_sub(1);
    // α_0..α_{n+1} with α_{n+1} = 0 (and zero beyond for the guard)
    let alpha = |i: i64| -> i64 {
        if i < 0 {
            0
        } else {
            i64::from(s.coeff(i as usize))
        }
    };
    // β_i given J_i and J_{i+1}
    let beta = |i: i64, ji: i8, jn: i8| alpha(i) + i64::from(ji) - q * i64::from(jn);
    // the compactness/range condition between β_{i-1} and β_i, i.e. on
    // (J_{i-1}, J_i, J_{i+1})
    let diamond = |i: i64, jp: i8, ji: i8, jn: i8| -> bool {
        let a = beta(i - 1, jp, ji);
        let b = beta(i, ji, jn);
        if a.abs() >= q || b.abs() >= q {
            return false;
        }
        if a.signum() * b.signum() == -1 {
            return false;
        }
        !(a.signum() == b.signum() && a != 0 && b.abs() == q - 1)
    };

    let last = n + 2;
    let mut steps = 0usize;
    let mut cells: Vec<[[u8; 3]; 3]> = Vec::with_capacity(last - 1);
    // column i = 2: J_0 = 0 is fixed; J_{-1} = 0 by convention
    let mut col = [[0u8; 3]; 3];
    for k in [-1i8, 0, 1] {
        if !diamond(0, 0, 0, k) {
            continue;
        }
        for l in [-1i8, 0, 1] {
            steps += 1;
            if diamond(1, 0, k, l) {
                col[ix(0)][ix(k)] |= 1 << ix(l);
            }
        }
    }
    cells.push(col);
    for i in 3..=last {
        let prev = cells[cells.len() - 1];
        let mut col = [[0u8; 3]; 3];
        for j in [-1i8, 0, 1] {
            for k in [-1i8, 0, 1] {
                // J_{i-1} = k must be reachable from some (h, j)
                let reachable = (0..3).any(|h| prev[h][ix(j)] & (1 << ix(k)) != 0);
                if !reachable {
                    continue;
                }
                for l in [-1i8, 0, 1] {
                    steps += 1;
                    if diamond(i as i64 - 1, j, k, l) {
                        col[ix(j)][ix(k)] |= 1 << ix(l);
                    }
                }
            }
        }
        cells.push(col);
    }
    let table = CarryTable { first: 2, cells };

    // back-read: J_{n+2} = 0
    let mut carries = vec![0i8; last + 1];
    let mut chosen: Option<(i8, i8)> = None;
    'outer: for j in PREFERENCE {
        for k in PREFERENCE {
            if table.cells[last - 2][ix(j)][ix(k)] & (1 << ix(0)) != 0 {
                chosen = Some((j, k));
                break 'outer;
            }
        }
    }
    let (mut j, mut k) = chosen.expect("every power sum has a compact form");
    carries[last - 1] = k;
    carries[last - 2] = j;
    let mut i = last - 1;
    // invariant: carries[i-1] = j, carries[i] = k are fixed and
    // k ∈ 𝒥_i[carries[i-2], j]; pick carries[i-2]
    while i >= 3 {
        let col = &table.cells[i - 2];
        let h = PREFERENCE
            .into_iter()
            .find(|&h| col[ix(h)][ix(j)] & (1 << ix(k)) != 0)
            .expect("back-read follows feasible cells");
        steps += 1;
        carries[i - 2] = h;
        k = j;
        j = h;
        i -= 1;
    }
    debug_assert_eq!(carries[0], 0);

    let coeffs: Vec<Digit> = (0..=n + 1)
        .map(|i| beta(i as i64, carries[i], carries[i + 1]) as Digit)
        .collect();
    let sum = PowerSum::from_digits(s.base, coeffs);
    debug_assert!(sum.is_compact());
    Compactified {
        sum,
        carries,
        table,
        steps,
    }
}
