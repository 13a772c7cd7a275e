mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::fixture;

fn cli(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_interview-sim"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn ok(out: &Output) {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn usage_errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    assert!(!cli(&[], dir.path()).status.success());
    assert!(!cli(&["simulate"], dir.path()).status.success());
    assert!(!cli(&["simulate", "--out", "x.jsonl", "--ablation", "bogus"], dir.path()).status.success());
    let missing = cli(&["report", "--runs", "nope.jsonl", "--out", "r"], dir.path());
    assert!(!missing.status.success());
    assert!(!missing.stderr.is_empty());
    let agent = cli(&["simulate", "--out", "x.jsonl", "--judge", "unconfigured"], dir.path());
    assert!(!agent.status.success());
}

#[test]
fn corpus_to_report_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let corpus_in = fixture("corpus");
    ok(&cli(&["prep-corpus", "--input", corpus_in.to_str().unwrap(), "--out", "corpus"], d));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("corpus/filter_report.json")).unwrap()).unwrap();
    assert_eq!(report["kept"], 17);

    ok(&cli(&["derive-scenarios", "--corpus", "corpus/corpus.jsonl", "--out", "scenarios"], d));
    let n = std::fs::read_dir(d.join("scenarios")).unwrap().count();
    assert_eq!(n, 17);

    let sim = cli(
        &["simulate", "--games", "6", "--seed", "3", "--scenarios", "scenarios", "--out", "runs.jsonl"],
        d,
    );
    ok(&sim);
    let summary: serde_json::Value = serde_json::from_slice(&sim.stdout).unwrap();
    assert_eq!(summary["games"], 6);

    ok(&cli(&["counterfactual", "--corpus", "corpus/corpus.jsonl", "--out", "cf.jsonl"], d));
    ok(&cli(
        &["consistency", "--counterfactuals", "cf.jsonl", "--corpus", "corpus/corpus.jsonl", "--out", "cons"],
        d,
    ));
    assert!(d.join("cons/consistency.csv").exists());
    ok(&cli(&["discourse", "--corpus", "corpus/corpus.jsonl", "--out", "disc"], d));
    assert!(d.join("disc/discourse.csv").exists());
    ok(&cli(&["report", "--runs", "runs.jsonl", "--out", "rep"], d));
    assert!(d.join("rep/conditions.csv").exists());
}

#[test]
fn simulate_is_repeatable_and_seed_sensitive() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for (seed, out) in [("7", "a.jsonl"), ("7", "b.jsonl"), ("8", "c.jsonl")] {
        ok(&cli(&["simulate", "--games", "5", "--seed", seed, "--out", out], d));
    }
    let read = |f: &str| std::fs::read(d.join(f)).unwrap();
    assert_eq!(read("a.jsonl"), read("b.jsonl"));
    assert_ne!(read("a.jsonl"), read("c.jsonl"));
}
