mod common;

use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

fn bk(cwd: &Path, args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_benchkeeper"))
        .args(args)
        .current_dir(cwd)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn help_and_version_exit_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let o = bk(tmp.path(), &["--help"], "");
    assert_eq!(code(&o), 0);
    let help = String::from_utf8_lossy(&o.stdout).to_string();
    for sub in ["evaluate", "analyze", "revise", "review", "approve", "rewrite", "detect-overfit", "report"] {
        assert!(help.contains(sub), "{sub}");
    }
    assert_eq!(code(&bk(tmp.path(), &["--version"], "")), 0);
}

#[test]
fn usage_errors_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&bk(tmp.path(), &[], "")), 1);
    assert_eq!(code(&bk(tmp.path(), &["frobnicate"], "")), 1);
    assert_eq!(code(&bk(tmp.path(), &["analyze", "--suite", "s"], "")), 1);
    assert_eq!(code(&bk(tmp.path(), &["report", "--suite", "s", "--before", "b"], "")), 1);
}

#[test]
fn pipeline_errors_exit_two() {
    let (_tmp, root) = common::fixture_copy();
    let o = bk(&root, &["evaluate", "--suite", "missing"], "");
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("manifest.json"));
    std::fs::write(root.join("bad.json"), "{ \"thresholds\": { \"failure_threshold\": 3 } }").unwrap();
    assert_eq!(code(&bk(&root, &["--config", "bad.json", "evaluate", "--suite", "suite"], "")), 2);
    // No generators or analyst configured.
    std::fs::write(root.join("empty.json"), "{}").unwrap();
    std::fs::write(root.join("o.jsonl"), "").unwrap();
    assert_eq!(code(&bk(&root, &["--config", "empty.json", "analyze", "--suite", "suite", "--outcomes", "o.jsonl"], "")), 2);
}

#[test]
fn full_pipeline_through_the_cli() {
    let (_tmp, root) = common::fixture_copy();
    let run = |dir: &str, args: &[&str], stdin: &str| {
        let mut full = vec!["--config", "config.json", "--run-dir", dir];
        full.extend_from_slice(args);
        let o = bk(&root, &full, stdin);
        assert_eq!(code(&o), 0, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        String::from_utf8_lossy(&o.stdout).to_string()
    };
    run("r1", &["evaluate", "--suite", "suite"], "");
    run("r2", &["analyze", "--suite", "suite", "--outcomes", "r1/outcomes.jsonl"], "");
    run("r3", &["revise", "--suite", "suite", "--verdicts", "r2/verdicts.jsonl"], "");
    run("r4", &["review", "--suite", "suite", "--proposals", "r3/proposals.jsonl"], "");
    let out = run("r5", &["approve", "--suite", "suite", "--reviews", "r4/reviews.jsonl"], "y\ny\ny\n");
    assert!(out.contains("accepted 3"));
    run("r6", &["evaluate", "--suite", "suite"], "");
    run(
        "r7",
        &["report", "--suite", "suite", "--outcomes", "r1/outcomes.jsonl", "--verdicts", "r2/verdicts.jsonl", "--before", "r1/outcomes.jsonl", "--after", "r6/outcomes.jsonl"],
        "",
    );
    let delta = std::fs::read_to_string(root.join("r7/accuracy_delta.csv")).unwrap();
    assert!(delta.contains("gen-a,fixture-suite,2/5,40.0%,5/5,100.0%,+60.0%"), "{delta}");
    assert!(root.join("r2/transcripts/analysis-xor_gate-gen-a.jsonl").is_file());
    assert!(root.join("r4/decisions.jsonl").is_file());
}

#[test]
fn default_run_dir_is_timestamped_under_runs() {
    let (_tmp, root) = common::fixture_copy();
    let o = bk(&root, &["--config", "config.json", "evaluate", "--suite", "suite"], "");
    assert_eq!(code(&o), 0);
    let entries: Vec<String> = std::fs::read_dir(root.join("runs")).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into()).collect();
    assert_eq!(entries.len(), 1);
    assert!(root.join("runs").join(&entries[0]).join("outcomes.jsonl").is_file());
}
