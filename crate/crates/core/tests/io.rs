//! Circuit files and word syntax.

mod common;

use common::*;
use num_bigint::BigInt;
use power_circuit::io::{format_bg_word, format_word, parse_bg_word, parse_circuit, parse_word, serialize_circuit};
use power_circuit::{BgLetter, Error, ReducedCircuit, DEFAULT_MAX_BITS};
use rand::Rng;

const SAMPLE: &str = "\
# q = 2; values 1, 1, 2, 4, 32
pcq 1
q 2
node 0
node 1
node 2
node 3
node 4
edge 2 0 1
edge 3 0 1
edge 3 1 1
edge 4 0 -1
edge 4 2 1
edge 4 3 1
mark M 0:1 3:-1 4:1
";

#[test]
fn sample_round_trip_and_value() {
    let f = parse_circuit(SAMPLE).unwrap();
    let m = &f.markings["M"];
    assert_eq!(f.circuit.eval_marking(m, DEFAULT_MAX_BITS).unwrap(), BigInt::from(29));
    let text = serialize_circuit(&f.circuit, f.markings.iter().map(|(k, v)| (k.as_str(), v))).unwrap();
    let canonical: String = SAMPLE.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    assert_eq!(text, canonical);
}

#[test]
fn empty_circuit_is_header_only() {
    let f = parse_circuit("pcq 1\nq 3\n").unwrap();
    let text = serialize_circuit(&f.circuit, []).unwrap();
    assert_eq!(text, "pcq 1\nq 3\n");
}

#[test]
fn validation_errors() {
    let bad_label = "pcq 1\nq 2\nnode 0\nnode 1\nedge 1 0 2\n";
    assert!(matches!(parse_circuit(bad_label), Err(Error::Validation(_))));
    let cycle = "pcq 1\nq 2\nnode 0\nnode 1\nedge 1 0 1\nedge 0 1 1\n";
    assert!(matches!(parse_circuit(cycle), Err(Error::Validation(_))));
    let multi = "pcq 1\nq 2\nnode 0\nnode 1\nedge 1 0 1\nedge 1 0 -1\n";
    assert!(matches!(parse_circuit(multi), Err(Error::Validation(_))));
    let bad_digit = "pcq 1\nq 2\nnode 0\nmark M 0:2\n";
    assert!(matches!(parse_circuit(bad_digit), Err(Error::Validation(_))));
}

#[test]
fn parse_errors_carry_line_numbers() {
    let cases = [
        ("q 2\n", 1),
        ("pcq 2\n", 1),
        ("pcq 1\nq 2\nnode x\n", 3),
        ("pcq 1\nq 2\nnode 0\n\nedge 0 7 1\n", 5),
        ("pcq 1\nq 2\nnode 0\nnode 0\n", 4),
        ("pcq 1\nq 2\nfoo\n", 3),
        ("pcq 1\nq 2\nnode 0\nmark M 0-1\n", 4),
        ("pcq 1\nq 2\nnode 0 1\n", 3),
    ];
    for (text, line) in cases {
        match parse_circuit(text) {
            Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
            other => panic!("{text:?}: {other:?}"),
        }
    }
}

#[test]
fn random_circuits_round_trip_byte_identically() {
    let mut r = rng(41);
    for round in 0..300 {
        let q = [2, 3, 5][round % 3];
        let mut pc = random_circuit(&mut r, q, 10, 30);
        let d = random_digits(&mut r, &pc, 4);
        let m = pc.new_marking(d).unwrap();
        let v = pc.eval_marking(&m, MAX_BITS).unwrap();
        let first = serialize_circuit(&pc, [("K", &m)]).unwrap();
        let f = parse_circuit(&first).unwrap();
        assert_eq!(f.circuit.eval_marking(&f.markings["K"], MAX_BITS).unwrap(), v);
        let second = serialize_circuit(&f.circuit, f.markings.iter().map(|(k, v)| (k.as_str(), v))).unwrap();
        assert_eq!(first, second);
        // Reduced circuits have gaps in their ids; the text is still canonical.
        let (rc, _) = ReducedCircuit::reduce(f.circuit).unwrap();
        let m = &f.markings["K"];
        let third = serialize_circuit(rc.circuit(), [("K", m)]).unwrap();
        let g = parse_circuit(&third).unwrap();
        assert_eq!(g.circuit.eval_marking(&g.markings["K"], MAX_BITS).unwrap(), v);
        let fourth = serialize_circuit(&g.circuit, g.markings.iter().map(|(k, v)| (k.as_str(), v))).unwrap();
        assert_eq!(third, fourth);
    }
}

#[test]
fn words_round_trip() {
    let mut r = rng(42);
    for _ in 0..300 {
        let f = r.gen_range(4..8);
        let len = r.gen_range(0..12);
        let w = random_hword(&mut r, f, len, 3);
        assert_eq!(parse_word(&format_word(&w), f).unwrap(), w);
        let bw: Vec<BgLetter> = (0..len)
            .map(|_| {
                let e = [-3, -1, 1, 2][r.gen_range(0..4)];
                if r.gen_bool(0.5) {
                    BgLetter::A(e)
                } else {
                    BgLetter::B(e)
                }
            })
            .collect();
        assert_eq!(parse_bg_word(&format_bg_word(&bw)).unwrap(), bw);
    }
    assert!(parse_bg_word("é").is_err());
}
