use std::path::PathBuf;
use std::process::{Command, Output};

use cubeforge_core::Report;

fn cubeforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cubeforge")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name).display().to_string()
}

fn temp_json(tag: &str) -> PathBuf {
    std::env::temp_dir().join(format!("cubeforge-{tag}-{}.json", std::process::id()))
}

/// Splits a repro line into arguments, honouring single quotes.
fn repro_args(line: &str) -> Vec<String> {
    let mut args = Vec::new();
    let mut cur = String::new();
    let mut quoted = false;
    for ch in line.chars() {
        match ch {
            '\'' => quoted = !quoted,
            ' ' if !quoted => {
                if !cur.is_empty() {
                    args.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        args.push(cur);
    }
    args
}

#[test]
fn homs_lists_the_hom_set() {
    let out = cubeforge(&["homs", "--site", "cs", "--from", "2", "--to", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().filter(|l| l.starts_with("2->1:")).count(), 6);
    assert!(text.contains("|Hom(□2,□1)| = 6"));
}

#[test]
fn skeletal_passes() {
    let out = cubeforge(&["skeletal", "--site", "csr", "--max-dim", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
}

#[test]
fn words_and_tables_agree() {
    let a = cubeforge(&["factor", "--site", "c", "--from", "1", "--map", "d1+ . p1"]);
    let b = cubeforge(&["factor", "--site", "c", "--map", "1->1:[1,1]"]);
    assert_eq!(a.status.code(), Some(0));
    assert!(stdout(&a).contains("1->1:[1,1] = 0->1:[1] ∘ 1->0:[0,0]"));
    assert_eq!(stdout(&a).lines().next(), stdout(&b).lines().next());
}

#[test]
fn failures_exit_one_and_their_repro_reproduces() {
    let out = cubeforge(&["section", "--site", "cs", "--map", "1->1:[1,0]"]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    let repro = text.lines().find_map(|l| l.trim().strip_prefix("repro: ")).expect("failure carries a repro");
    let args = repro_args(repro);
    assert_eq!(args[0], "cubeforge");
    let rerun = cubeforge(&args[1..].iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(rerun.status.code(), Some(1));
}

#[test]
fn pushout_of_two_degeneracies() {
    let out = cubeforge(&["pushout", "--site", "cs", "--from", "2", "--map", "m1", "--map", "p1"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let out = cubeforge(&["pushout", "--site", "cs", "--from", "2", "--map", "m1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(cubeforge(&["homs", "--site", "nonsense", "--from", "1", "--to", "1"]).status.code(), Some(2));
    assert_eq!(cubeforge(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(cubeforge(&["member", "--site", "cs", "--map", "1->1:[0,7]"]).status.code(), Some(2));
    assert_eq!(cubeforge(&["reedy-axioms", "--site", "dcs"]).status.code(), Some(2));
}

#[test]
fn resource_bounds_exit_three() {
    let out = cubeforge(&["homs", "--site", "dcsr", "--from", "3", "--to", "3", "--slack", "2"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn cubical_set_files() {
    let good = cubeforge(&["ezset", &fixture("circle.json")]);
    assert_eq!(good.status.code(), Some(0), "{}", stdout(&good));
    let bad = cubeforge(&["ezset", &fixture("circle_bad.json")]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("functoriality"));
    let missing = cubeforge(&["ezset", &fixture("absent.json")]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn diag_suite_json_is_deterministic() {
    let (a, b) = (temp_json("diag-a"), temp_json("diag-b"));
    for path in [&a, &b] {
        let out = cubeforge(&["diag-suite", "--bound", "10", "--site", "dcs", "--json", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    }
    let (ta, tb) = (std::fs::read_to_string(&a).unwrap(), std::fs::read_to_string(&b).unwrap());
    assert_eq!(ta, tb);
    let report = Report::from_json(&ta).unwrap();
    assert!(report.passed());
    assert_eq!(report.schema, 1);
    assert!(report.checks.iter().all(|c| c.elapsed_ms.is_none()));
    assert!(report.checks.iter().any(|c| c.name == "idempotents" && !c.notes.is_empty()));
    let _ = std::fs::remove_file(a);
    let _ = std::fs::remove_file(b);
}

#[test]
fn diag_suite_full_passes() {
    let out = cubeforge(&["diag-suite", "--bound", "10"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("no-distributive-factorization"));
}
