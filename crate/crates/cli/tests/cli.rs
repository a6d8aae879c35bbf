//! End-to-end runs of the `mealy` binary.

use std::io::Write;
use std::process::{Command, Output, Stdio};

use mealy::{parse_machine, zoo};

fn fixture(name: &str) -> String {
    format!("{}/../../fixtures/{name}.mealy", env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mealy"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().unwrap()
}

#[test]
fn info_reports_predicates() {
    let out = stdout(&["info", &fixture("swap")]);
    assert!(out.contains("states: 2 (x y)"));
    assert!(out.contains("bireversible: yes"));
    assert!(out.contains("md-trivial: yes"));
}

#[test]
fn machine_outputs_parse_back() {
    let cases: [(&[&str], _); 4] = [
        (&["minimize"], mealy::minimize(&zoo::cyc())),
        (&["dual"], zoo::swap().dual()),
        (
            &["power"],
            zoo::swap().power(2, &Default::default()).unwrap(),
        ),
        (
            &["closure"],
            mealy::semigroup::tensor_closure(&zoo::swap(), &Default::default()).unwrap(),
        ),
    ];
    for (cmd, expected) in cases {
        let f = fixture(if cmd == ["minimize"] { "cyc" } else { "swap" });
        let mut args = vec![cmd[0], &f];
        if cmd == ["power"] {
            args.push("2");
        }
        for json in [false, true] {
            let mut a = args.clone();
            if json {
                a.insert(0, "--json");
            }
            let m = parse_machine(&stdout(&a)).unwrap();
            assert!(m.same_tables(&expected), "{a:?}");
        }
    }
}

#[test]
fn closure_names_its_letters() {
    let out = stdout(&["closure", &fixture("swap")]);
    assert!(out.starts_with("# a = a\n# aa = aa\n"), "{out}");
}

#[test]
fn reduce_six_is_not_trivial() {
    let out = stdout(&["reduce", &fixture("six")]);
    assert!(out.contains("md-trivial: no"));
}

#[test]
fn degree_of_baby_aleshin() {
    let out = stdout(&["degree", &fixture("baby_aleshin")]);
    assert!(out.starts_with("connection degree: 1\n"), "{out}");
    assert!(out.contains("power 2: disconnected, 2 components"));
}

#[test]
fn degree_beyond_the_scan_is_inconclusive() {
    let out = run(&["degree", &fixture("dual_aleshin"), "--max", "3"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stdout).unwrap().contains("at least"));
}

#[test]
fn portrait_levels() {
    let out = stdout(&["portrait", &fixture("six"), "1", "-k", "3"]);
    assert!(
        out.starts_with("level 0: (σ)\nlevel 1: (id, σ)\nlevel 2: (σ, σ, σ, σ)\n"),
        "{out}"
    );
}

#[test]
fn order_and_budget() {
    assert!(stdout(&["order", &fixture("swap")]).starts_with("order: 1\n"));
    assert_eq!(code(&["--max-elements", "3", "order", &fixture("cyc")]), 1);
}

#[test]
fn decide_verdicts_and_certificates() {
    assert!(stdout(&["decide", &fixture("dual_aleshin")]).starts_with("free semigroup of rank 2\n"));
    assert!(stdout(&["decide", &fixture("six")]).starts_with("infinite group\n"));
    assert!(stdout(&["decide", &fixture("aleshin")]).starts_with("infinite group\n"));
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("cert.json");
    let out = stdout(&[
        "decide",
        &fixture("six"),
        "--certificate",
        cert.to_str().unwrap(),
    ]);
    assert!(out.contains("certificate checked"));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    assert!(v.is_object());
}

#[test]
fn decide_outside_the_decidable_shapes() {
    let out = run(&["decide", &fixture("triv")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr)
        .unwrap()
        .contains("semi-decision only"));
}

#[test]
fn bad_input_exits_with_two() {
    assert_eq!(code(&["info", "/nonexistent/machine.mealy"]), 2);
    assert_eq!(code(&["frobnicate"]), 2);
    let mut child = Command::new(env!("CARGO_BIN_EXE_mealy"))
        .args(["info", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::null())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(b"x a -> y\n")
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("line 1"));
}

#[test]
fn stdin_input() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_mealy"))
        .args(["dual", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(mealy::format::to_text(&zoo::swap(), None).as_bytes())
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    let m = parse_machine(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert!(m.same_tables(&zoo::swap().dual()));
}

#[test]
fn dot_output_has_every_transition() {
    let dir = tempfile::tempdir().unwrap();
    for (name, cmd) in [("aleshin", "info"), ("six", "dual")] {
        let path = dir.path().join(format!("{name}.dot"));
        stdout(&["--dot", path.to_str().unwrap(), cmd, &fixture(name)]);
        let dot = std::fs::read_to_string(&path).unwrap();
        let m = parse_machine(&std::fs::read_to_string(fixture(name)).unwrap()).unwrap();
        let m = if cmd == "dual" { m.dual() } else { m };
        assert!(dot.starts_with("digraph"), "{dot}");
        assert_eq!(dot.matches('{').count(), dot.matches('}').count());
        let labels: usize = dot
            .lines()
            .filter(|l| l.contains(" -> "))
            .map(|l| l.matches('|').count())
            .sum();
        assert_eq!(labels, m.n_states() * m.n_letters(), "{dot}");
    }
}

#[test]
fn random_is_deterministic_per_seed() {
    let args = [
        "random",
        "--states",
        "3",
        "--letters",
        "2",
        "--filter",
        "bireversible",
        "--seed",
        "7",
    ];
    let a = stdout(&args);
    assert_eq!(a, stdout(&args));
    let m = parse_machine(&a).unwrap();
    assert!(m.is_invertible() && m.is_reversible());
    assert_eq!((m.n_states(), m.n_letters()), (3, 2));
}

#[test]
fn census_writes_its_outputs_and_resumes() {
    let dir = tempfile::tempdir().unwrap();
    let p = |f: &str| dir.path().join(f).to_str().unwrap().to_string();
    let (csv, summary, journal) = (p("c.csv"), p("s.json"), p("j.jsonl"));
    let args = [
        "census",
        "--states",
        "3",
        "--letters",
        "2",
        "--filter",
        "bireversible",
        "--symmetry",
        "up-to-iso",
        "--analysis",
        "md",
        "--analysis",
        "verdict",
        "--csv",
        &csv,
        "--summary",
        &summary,
        "--journal",
        &journal,
    ];
    let first = stdout(&args);
    let report: serde_json::Value = serde_json::from_str(&first).unwrap();
    let rows = report["rows"].as_u64().unwrap() as usize;
    assert!(rows > 0);
    assert_eq!(
        std::fs::read_to_string(&csv).unwrap().lines().count(),
        rows + 1
    );
    let saved: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&summary).unwrap()).unwrap();
    assert_eq!(saved["counts"], report["counts"]);
    assert!(std::fs::metadata(&journal).unwrap().len() > 0);
    let second: serde_json::Value = serde_json::from_str(&stdout(&args)).unwrap();
    assert_eq!(second["counts"], report["counts"]);
    assert_eq!(second["tallies"], report["tallies"]);
}
