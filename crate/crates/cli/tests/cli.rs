//! End-to-end tests of the `pc` and `wp` binaries: golden output, exit
//! codes and file round trips.

use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "fixtures", name].iter().collect();
    p.to_str().unwrap().to_string()
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

fn pc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pc")).args(args).output().unwrap()
}

fn wp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wp")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

// ---------------------------------------------------------------------------
// pc
// ---------------------------------------------------------------------------

#[test]
fn check_reports_power_circuits() {
    let o = pc(&["check", &fixture("sample.pc")]);
    assert_eq!((code(&o), stdout(&o).as_str()), (0, "power-circuit\n"));
    let o = pc(&["check", &fixture("not_power.pc")]);
    assert_eq!((code(&o), stdout(&o).as_str()), (0, "not-a-power-circuit\n"));
}

#[test]
fn eval_prints_exact_values() {
    let o = pc(&["eval", &fixture("sample.pc"), "M"]);
    assert_eq!((code(&o), stdout(&o).as_str()), (0, "29\n"));
    let o = pc(&["eval", &fixture("sample.pc"), "Z"]);
    assert_eq!(stdout(&o), "0\n");
    let o = pc(&["eval", &fixture("tower.pc"), "S"]);
    assert_eq!(stdout(&o), "65536\n");
}

#[test]
fn eval_failures_have_documented_codes() {
    assert_eq!(code(&pc(&["eval", &fixture("tower.pc"), "T"])), 3);
    assert_eq!(code(&pc(&["eval", &fixture("tower.pc"), "S", "--max-bits", "8"])), 3);
    let o = pc(&["eval", &fixture("tower.pc"), "T", "--max-bits", "70000"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim().len(), 19729);
    assert_eq!(code(&pc(&["eval", &fixture("not_power.pc"), "M"])), 3);
    assert_eq!(code(&pc(&["eval", &fixture("sample.pc"), "nope"])), 2);
    assert_eq!(code(&pc(&["eval", "/nonexistent/file.pc", "M"])), 2);
}

#[test]
fn cmp_prints_order_and_unit_flag() {
    let o = pc(&["cmp", &fixture("sample.pc"), "M", "Z"]);
    assert_eq!((code(&o), stdout(&o).as_str()), (0, "> unit-diff=false\n"));
    let o = pc(&["cmp", &fixture("sample.pc"), "Z", "M"]);
    assert_eq!(stdout(&o), "< unit-diff=false\n");
    let o = pc(&["cmp", &fixture("sample.pc"), "M", "M"]);
    assert_eq!(stdout(&o), "= unit-diff=false\n");
    let o = pc(&["cmp", &fixture("tower.pc"), "T", "S"]);
    assert_eq!(stdout(&o), "> unit-diff=false\n");
    assert_eq!(code(&pc(&["cmp", &fixture("not_power.pc"), "M", "N"])), 3);
}

#[test]
fn cmp_detects_unit_differences() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("unit.pc");
    // 2 vs 1 and 4 vs 3 (= 4 - 1)
    std::fs::write(
        &path,
        "pcq 1\nq 2\nnode 0\nnode 1\nnode 2\nedge 1 0 1\nedge 2 1 1\nmark A 1:1\nmark B 0:1\nmark C 2:1\nmark D 2:1 0:-1\n",
    )
    .unwrap();
    let p = path.to_str().unwrap();
    assert_eq!(stdout(&pc(&["cmp", p, "A", "B"])), "> unit-diff=true\n");
    assert_eq!(stdout(&pc(&["cmp", p, "D", "C"])), "< unit-diff=true\n");
    assert_eq!(stdout(&pc(&["cmp", p, "C", "B"])), "> unit-diff=false\n");
}

#[test]
fn reduce_matches_golden_files() {
    let o = pc(&["reduce", &fixture("sample.pc")]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), golden("sample.treed.pc"));
    let o = pc(&["reduce", "--treed", &fixture("sample.pc")]);
    assert_eq!(stdout(&o), golden("sample.treed.pc"));
    let o = pc(&["reduce", "--simple", &fixture("sample.pc")]);
    assert_eq!(stdout(&o), golden("sample.simple.pc"));
    assert_eq!(code(&pc(&["reduce", &fixture("not_power.pc")])), 3);
    assert_eq!(code(&pc(&["reduce", "--simple", "--treed", &fixture("sample.pc")])), 2);
}

#[test]
fn reduce_round_trips_through_files() {
    let dir = tempfile::tempdir().unwrap();
    for (flag, gold) in [("--treed", "sample.treed.pc"), ("--simple", "sample.simple.pc")] {
        let out = dir.path().join(format!("out{flag}.pc"));
        let o = pc(&["reduce", flag, &fixture("sample.pc"), "-o", out.to_str().unwrap()]);
        assert_eq!((code(&o), stdout(&o).as_str()), (0, ""));
        let text = std::fs::read_to_string(&out).unwrap();
        assert_eq!(text, golden(gold));
        assert_eq!(stdout(&pc(&["eval", out.to_str().unwrap(), "M"])), "29\n");
        // Plain reduction of a reduced circuit is a fixed point.
        let again = pc(&["reduce", "--simple", out.to_str().unwrap()]);
        assert_eq!(stdout(&again), text);
    }
}

#[test]
fn malformed_circuit_files_are_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        "q 2\nnode 0\n",
        "pcq 1\nq 2\nnode 0\nnode 1\nedge 1 0 2\n",
        "pcq 1\nq 2\nnode 0\nnode 1\nedge 1 0 1\nedge 0 1 1\n",
        "pcq 1\nq 1\n",
        "pcq 1\nq 2\nedge 0 1 1\n",
    ];
    for (i, text) in cases.iter().enumerate() {
        let path = dir.path().join(format!("bad{i}.pc"));
        std::fs::write(&path, text).unwrap();
        let o = pc(&["check", path.to_str().unwrap()]);
        assert_eq!(code(&o), 2, "{text:?}");
        assert!(!o.stderr.is_empty());
    }
    assert_eq!(code(&pc(&["frobnicate"])), 2);
}

// ---------------------------------------------------------------------------
// wp
// ---------------------------------------------------------------------------

#[test]
fn higman_answers() {
    let o = wp(&["higman", "-q", "2", "-f", "4", "a2 a1 A2 a1^-2"]);
    assert_eq!((code(&o), stdout(&o).as_str()), (0, "trivial\n"));
    let o = wp(&["higman", "-q", "2", "-f", "4", "a2", "a1", "A2", "a1^-2"]);
    assert_eq!(stdout(&o), "trivial\n");
    let o = wp(&["higman", "-q", "3", "-f", "4", "a1"]);
    assert_eq!(stdout(&o), "nontrivial\n");
    let o = wp(&["higman", "-q", "2", "-f", "4", "a1 a4 A1 a4^-2"]);
    assert_eq!(stdout(&o), "trivial\n");
    let o = wp(&["--simple", "higman", "-q", "2", "-f", "4", "a1 a4 A1 a4^-2"]);
    assert_eq!(stdout(&o), "trivial\n");
    let o = wp(&["higman", "-q", "2", "-f", "5"]);
    assert_eq!(stdout(&o), "trivial\n");
}

#[test]
fn bg_answers() {
    let o = wp(&["bg", "-q", "2", "b a B a b A B a^-2"]);
    assert_eq!((code(&o), stdout(&o).as_str()), (0, "trivial\n"));
    let o = wp(&["bg", "-q", "3", "b a B a b A B a^-2"]);
    assert_eq!(stdout(&o), "nontrivial\n");
    let o = wp(&["bg", "-q", "3", "b", "a", "B"]);
    assert_eq!(stdout(&o), "nontrivial\n");
}

#[test]
fn word_errors_are_input_errors() {
    assert_eq!(code(&wp(&["higman", "-q", "2", "-f", "4", "a5"])), 2);
    assert_eq!(code(&wp(&["higman", "-q", "2", "-f", "3", "a1"])), 2);
    assert_eq!(code(&wp(&["higman", "-q", "1", "-f", "4", "a1"])), 2);
    assert_eq!(code(&wp(&["higman", "-q", "2", "-f", "4", "a1^0"])), 2);
    assert_eq!(code(&wp(&["bg", "-q", "2", "c"])), 2);
    assert_eq!(code(&wp(&["bg", "-q", "2", "a^x"])), 2);
    assert_eq!(code(&wp(&["bg", "a"])), 2);
}
