//! Exhaustive and randomized checks of the compact power-sum machinery.

mod common;

use std::cmp::Ordering;
use std::collections::HashMap;

use common::rng;
use power_circuit::compact::{compactify_with_table, PowerSum};
use power_circuit::compactify;
use rand::Rng;

/// Calls `f` on every coefficient vector of length `len` over `D`.
fn for_all_sums(q: i64, len: usize, mut f: impl FnMut(&[i64])) {
    let mut c = vec![-(q - 1); len];
    loop {
        f(&c);
        let mut i = 0;
        loop {
            if i == len {
                return;
            }
            if c[i] < q - 1 {
                c[i] += 1;
                break;
            }
            c[i] = -(q - 1);
            i += 1;
        }
    }
}

fn value(q: i64, c: &[i64]) -> i64 {
    c.iter().rev().fold(0, |acc, &d| acc * q + d)
}

#[test]
fn compactify_is_unique_minimal_and_ordered() {
    for (q, n) in [(2i64, 8usize), (3, 6)] {
        // minimum nonzero count over all sums with exponents ≤ n+1
        let mut best: HashMap<i64, usize> = HashMap::new();
        for_all_sums(q, n + 2, |c| {
            let nz = c.iter().filter(|&&d| d != 0).count();
            let e = best.entry(value(q, c)).or_insert(usize::MAX);
            *e = (*e).min(nz);
        });
        let mut canonical: HashMap<i64, Vec<i32>> = HashMap::new();
        for_all_sums(q, n + 1, |c| {
            let s = PowerSum::new(q, c.to_vec()).unwrap();
            let t = compactify(&s);
            assert!(t.is_compact());
            assert_eq!(t.value(), s.value());
            let v = value(q, c);
            assert!(t.nonzero_count() <= best[&v], "{c:?}");
            let prev = canonical.entry(v).or_insert_with(|| t.trimmed().to_vec());
            assert_eq!(prev.as_slice(), t.trimmed(), "two compact forms for {v}");
            if s.is_compact() {
                assert_eq!(s.trimmed(), t.trimmed(), "compact input changed");
            }
        });
        let mut by_value: Vec<(i64, PowerSum)> = canonical
            .into_iter()
            .map(|(v, c)| (v, PowerSum::new(q, c.into_iter().map(i64::from).collect()).unwrap()))
            .collect();
        by_value.sort_by_key(|(v, _)| *v);
        for w in by_value.windows(2) {
            assert_eq!(w[0].1.cmp_lex(&w[1].1).unwrap(), Ordering::Less);
            assert_eq!(w[0].1.is_increment(&w[1].1).unwrap(), w[1].0 == w[0].0 + 1);
        }
    }
}

#[test]
fn increment_is_exact_on_small_compact_sums() {
    for q in [2i64, 3, 5] {
        let mut compact = Vec::new();
        for_all_sums(q, 4, |c| {
            let s = PowerSum::new(q, c.to_vec()).unwrap();
            if s.is_compact() {
                compact.push(s);
            }
        });
        for s in &compact {
            for t in &compact {
                let d = t.value() - s.value();
                assert_eq!(s.is_increment(t).unwrap(), d == 1.into());
                let expect = s.value().cmp(&t.value());
                assert_eq!(s.cmp_lex(t).unwrap(), expect);
            }
        }
    }
}

#[test]
fn rules_preserve_value_and_rejoin() {
    let mut r = rng(21);
    let mut multi = 0;
    for round in 0..3000 {
        let q = [2i64, 3, 5][round % 3];
        let len = r.gen_range(1..12);
        let c: Vec<i64> = (0..len).map(|_| r.gen_range(-(q - 1)..q)).collect();
        let s = PowerSum::new(q, c).unwrap();
        let target = compactify(&s);
        let (nf, _) = s.normalize_leftmost(10_000).expect("normalization terminates");
        assert_eq!(nf.trimmed(), target.trimmed());
        let redexes = s.redexes();
        if redexes.len() >= 2 {
            multi += 1;
        }
        for rdx in redexes {
            let t = s.apply_rule(rdx.rule, rdx.i, rdx.j).unwrap();
            assert_eq!(t.value(), s.value());
            assert!(t.nonzero_count() <= s.nonzero_count());
            let (nf2, _) = t.normalize_leftmost(10_000).unwrap();
            assert_eq!(nf2.trimmed(), target.trimmed());
        }
    }
    assert!(multi > 500, "too few sums with overlapping redexes: {multi}");
}

#[test]
fn compactify_runs_in_linear_steps() {
    let mut r = rng(22);
    let mut ratios = Vec::new();
    for n in [100usize, 1000, 10_000] {
        let c: Vec<i64> = (0..n).map(|_| r.gen_range(-2..3)).collect();
        let s = PowerSum::new(3, c).unwrap();
        let out = compactify_with_table(&s);
        assert_eq!(out.sum.value(), s.value());
        assert!(out.sum.is_compact());
        ratios.push(out.steps as f64 / n as f64);
    }
    for r in &ratios {
        assert!(*r <= 40.0, "steps per coefficient {ratios:?}");
    }
}
