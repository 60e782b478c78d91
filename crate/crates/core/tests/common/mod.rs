#![allow(dead_code)]

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use power_circuit::{Digits, NodeId, PowerCircuit};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub const MAX_BITS: u64 = 4096;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random power circuit with at most `n` nodes whose node exponents stay
/// below `max_exp`, so every value fits the oracle's bit budget.
pub fn random_circuit(rng: &mut ChaCha8Rng, q: i64, n: usize, max_exp: i64) -> PowerCircuit {
    let mut pc = PowerCircuit::new(q).unwrap();
    let mut exps: Vec<(NodeId, BigInt)> = Vec::new();
    let mut attempts = 0;
    while exps.len() < n && attempts < 20 * n {
        attempts += 1;
        let fanout = if exps.is_empty() { 0 } else { rng.gen_range(0..=exps.len().min(3)) };
        let mut succ: Vec<(NodeId, i64)> = Vec::new();
        let mut exp = BigInt::from(0);
        for _ in 0..fanout {
            let (v, ev) = &exps[rng.gen_range(0..exps.len())];
            if succ.iter().any(|(w, _)| w == v) {
                continue;
            }
            let d = random_digit(rng, q);
            exp += ev * d;
            succ.push((*v, d));
        }
        let e = exp.to_i64().unwrap_or(i64::MAX);
        if !(0..max_exp).contains(&e) {
            continue;
        }
        let u = pc.add_node(succ).unwrap();
        let value = num_traits::pow(BigInt::from(q), e as usize);
        exps.push((u, value));
    }
    pc
}

pub fn random_digit(rng: &mut ChaCha8Rng, q: i64) -> i64 {
    loop {
        let d = rng.gen_range(-(q - 1)..=q - 1);
        if d != 0 {
            return d;
        }
    }
}

/// Random digits over the live nodes of `pc`.
pub fn random_digits(rng: &mut ChaCha8Rng, pc: &PowerCircuit, max_support: usize) -> Vec<(NodeId, i64)> {
    let nodes: Vec<NodeId> = pc.nodes().collect();
    if nodes.is_empty() {
        return Vec::new();
    }
    let k = rng.gen_range(0..=max_support.min(nodes.len()));
    let mut out: Vec<(NodeId, i64)> = Vec::new();
    for _ in 0..k {
        let u = nodes[rng.gen_range(0..nodes.len())];
        if out.iter().all(|(v, _)| *v != u) {
            out.push((u, random_digit(rng, pc.q() as i64)));
        }
    }
    out
}

pub fn digits_value(pc: &PowerCircuit, d: &Digits) -> BigInt {
    pc.eval_digits(d, MAX_BITS).unwrap()
}

// ---------------------------------------------------------------------------
// Group words
// ---------------------------------------------------------------------------

use power_circuit::{BgLetter, HLetter, PairValue};

pub fn h(gen: usize, exp: i64) -> HLetter {
    HLetter { gen, exp }
}

pub fn h_inverse(w: &[HLetter]) -> Vec<HLetter> {
    w.iter().rev().map(|l| h(l.gen, -l.exp)).collect()
}

/// `a_{i+1} a_i a_{i+1}^{-1} a_i^{-q}` (indices mod `f`, 1-based).
pub fn h_relator(i: usize, f: usize, q: i64) -> Vec<HLetter> {
    let j = i % f + 1;
    vec![h(j, 1), h(i, 1), h(j, -1), h(i, -q)]
}

pub fn random_hword(rng: &mut ChaCha8Rng, f: usize, len: usize, max_exp: i64) -> Vec<HLetter> {
    (0..len)
        .map(|_| {
            let e = loop {
                let e = rng.gen_range(-max_exp..=max_exp);
                if e != 0 {
                    break e;
                }
            };
            h(rng.gen_range(1..=f), e)
        })
        .collect()
}

/// A product of `n` random conjugates of relators; trivial by construction.
pub fn trivial_hword(rng: &mut ChaCha8Rng, f: usize, q: i64, n: usize, conj_len: usize) -> Vec<HLetter> {
    let mut out = Vec::new();
    for _ in 0..n {
        let len = rng.gen_range(0..=conj_len);
        let g = random_hword(rng, f, len, 2);
        let mut r = h_relator(rng.gen_range(1..=f), f, q);
        if rng.gen_bool(0.5) {
            r = h_inverse(&r);
        }
        out.extend(g.iter().copied());
        out.extend(r);
        out.extend(h_inverse(&g));
    }
    out
}

pub fn bg_inverse(w: &[BgLetter]) -> Vec<BgLetter> {
    w.iter()
        .rev()
        .map(|l| match *l {
            BgLetter::A(e) => BgLetter::A(-e),
            BgLetter::B(e) => BgLetter::B(-e),
        })
        .collect()
}

/// `b a b^{-1} a b a^{-1} b^{-1} a^{-q}`.
pub fn bg_relator(q: i64) -> Vec<BgLetter> {
    use BgLetter::*;
    vec![B(1), A(1), B(-1), A(1), B(1), A(-1), B(-1), A(-q)]
}

/// A random word over `a` and `t = b a b^{-1}` together with its value in
/// `BS(1,q)`, computed by the pair oracle.
pub fn random_bs_word_in_bg(rng: &mut ChaCha8Rng, q: i64, len: usize) -> (Vec<BgLetter>, PairValue) {
    use BgLetter::*;
    let mut w = Vec::new();
    let mut v = PairValue::identity();
    for _ in 0..len {
        let e = loop {
            let e = rng.gen_range(-3i64..=3);
            if e != 0 {
                break e;
            }
        };
        if rng.gen_bool(0.5) {
            w.push(A(e));
            v = v.mul(&PairValue::a_pow(e), q).unwrap();
        } else {
            w.extend([B(1), A(e), B(-1)]);
            v = v.mul(&PairValue::t_pow(e), q).unwrap();
        }
    }
    (w, v)
}
