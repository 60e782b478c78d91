//! Word problem of `BG(q)`.

mod common;

use common::*;
use power_circuit::bs::bg_trivial_stats;
use power_circuit::{bg_trivial, BgLetter, Mode};
use rand::Rng;

use BgLetter::*;

#[test]
fn relator_and_its_conjugates_are_trivial() {
    let mut rng = rng(21);
    for q in 2..5 {
        assert!(bg_trivial(&bg_relator(q), q, Mode::Treed).unwrap());
        for _ in 0..30 {
            let mut w = Vec::new();
            for _ in 0..rng.gen_range(1..4) {
                let g: Vec<BgLetter> = (0..rng.gen_range(0..5))
                    .map(|_| if rng.gen_bool(0.5) { A(rng.gen_range(-2..=2)) } else { B(rng.gen_range(-2..=2)) })
                    .collect();
                let r = if rng.gen_bool(0.5) { bg_relator(q) } else { bg_inverse(&bg_relator(q)) };
                w.extend(g.iter().copied());
                w.extend(r);
                w.extend(bg_inverse(&g));
            }
            for mode in [Mode::Simple, Mode::Treed] {
                assert!(bg_trivial(&w, q, mode).unwrap(), "{w:?}");
            }
        }
    }
}

#[test]
fn subgroup_words_match_the_pair_oracle() {
    let mut rng = rng(22);
    for q in 2..5 {
        for _ in 0..80 {
            let len = rng.gen_range(1..7);
            let (w, v) = random_bs_word_in_bg(&mut rng, q, len);
            assert_eq!(bg_trivial(&w, q, Mode::Treed).unwrap(), v.is_identity(), "{w:?}");
            // u u^{-1} is always trivial
            let mut ww = w.clone();
            ww.extend(bg_inverse(&w));
            assert!(bg_trivial(&ww, q, Mode::Simple).unwrap());
        }
    }
}

#[test]
fn britton_reduced_words_are_nontrivial() {
    // b a b a ... : no pinch ever applies.
    for q in 2..4 {
        assert!(!bg_trivial(&[B(1), A(1), B(1), A(1)], q, Mode::Treed).unwrap());
        assert!(!bg_trivial(&[B(1)], q, Mode::Treed).unwrap());
        assert!(!bg_trivial(&[A(1), B(-1), A(1), B(1)], q, Mode::Treed).unwrap());
    }
}

#[test]
fn nested_conjugation_has_huge_exponents() {
    // w_0 = a, w_{n+1} = (b w_n b^{-1}) a (b w_n b^{-1})^{-1}: if w_n = a^M
    // then w_{n+1} = a^{q^M}, so the exponents grow like a tower.
    let q = 2;
    let mut w = vec![A(1)];
    for _ in 0..6 {
        let mut next = vec![B(1)];
        next.extend(w.iter().copied());
        next.push(B(-1));
        w = next;
        let mut c = w.clone();
        c.push(A(1));
        c.extend(bg_inverse(&w));
        w = c;
    }
    let mut ww = w.clone();
    ww.extend(bg_inverse(&w));
    let (trivial, stats) = bg_trivial_stats(&ww, q, Mode::Treed).unwrap();
    assert!(trivial);
    assert!(stats.nodes <= 2 * ww.len(), "{stats:?}");
    // w = a^M with M a tower of height 6, so w itself is nontrivial, and
    // so is the commutator-free product w a w^{-1} a^{-2}.
    assert!(!bg_trivial(&w, q, Mode::Treed).unwrap());
    let mut c = w.clone();
    c.push(A(1));
    c.extend(bg_inverse(&w));
    c.push(A(-2));
    assert!(!bg_trivial(&c, q, Mode::Simple).unwrap());
}
