mod common;

use std::io::Cursor;

use benchkeeper::approve::{interactive_approve, proposal_hash, Decision, DecisionRecord, ReviewedProposal};
use benchkeeper::report::{flaw_stats_csv, load_report, matrix_csv, render_reports, Report, FN_LABEL, FP_LABEL};
use benchkeeper::run::{create_run_dir, read_transcript, transcript_jsonl, write_transcript};
use benchkeeper::suite;
use benchkeeper_core::outcome::FailureSet;
use benchkeeper_core::overfit::{build_matrices, cells_from_outcomes};
use benchkeeper_core::stats::{compute_accuracy_delta, compute_flaw_stats};
use benchkeeper_core::transcript::{AgentStep, AgentTranscript, Observation, Role, StepAction, Terminal};
use benchkeeper_core::verdict::{ReviewResult, RevisionProposal};
use benchkeeper_core::{ActionInvocation, ActionName, EvalOutcome, FlawVerdict, SimResult};

fn outcome(case: &str, model: &str, variant: &str, pass: bool) -> EvalOutcome {
    EvalOutcome {
        case_id: case.into(),
        model_id: model.into(),
        variant_id: variant.into(),
        generated_source: String::new(),
        sim: if pass { SimResult::passed("") } else { SimResult::opaque_failure("") },
        attempt_index: 1,
    }
}

fn sample_report() -> Report {
    let fs = FailureSet {
        case_ids: vec!["a".into(), "b".into()],
        per_case_fail_fraction: [("a".to_string(), 1.0), ("b".to_string(), 1.0)].into_iter().collect(),
        models_considered: vec!["m".into()],
        threshold: 1.0,
    };
    let v = FlawVerdict::flaw("a", "m", "unclear", "KMAP".parse().unwrap(), "analysis-a-m");
    let before = vec![outcome("a", "m", "orig", false), outcome("b", "m", "orig", false), outcome("c", "m", "orig", true)];
    let after = vec![outcome("a", "m", "orig", true), outcome("b", "m", "orig", false), outcome("c", "m", "orig", true)];
    let mut with_variants = after.clone();
    with_variants.push(outcome("a", "m", "v1", false));
    with_variants.push(outcome("b", "m", "v1", true));
    Report {
        flaw_stats: vec![compute_flaw_stats("s", 3, &[v], &fs)],
        matrices: build_matrices(&cells_from_outcomes(&with_variants)),
        deltas: compute_accuracy_delta("s", &before, &after),
    }
}

#[test]
fn report_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let r = sample_report();
    let written = render_reports(&r, dir.path()).unwrap();
    assert_eq!(written.len(), 5);
    assert_eq!(load_report(&dir.path().join("report.json")).unwrap(), r);
    let csv = std::fs::read_to_string(dir.path().join("flaw_stats.csv")).unwrap();
    assert_eq!(csv.lines().nth(1).unwrap(), "s,2/3,66.7%,1/3,33.3%,0,0,1");
    let delta = std::fs::read_to_string(dir.path().join("accuracy_delta.csv")).unwrap();
    assert_eq!(delta.lines().nth(1).unwrap(), "m,s,1/3,33.3%,2/3,66.7%,+33.3%");
    let matrix = matrix_csv(&r.matrices);
    assert!(matrix.lines().next().unwrap().contains(FN_LABEL) && matrix.contains(FP_LABEL));
    assert!(matrix.lines().nth(1).unwrap().starts_with("m,0,1,1,0,overfitting,"));
}

#[test]
fn empty_report_has_headers_only() {
    let dir = tempfile::tempdir().unwrap();
    render_reports(&Report::default(), dir.path()).unwrap();
    for f in ["flaw_stats.csv", "overfit_matrix.csv", "accuracy_delta.csv"] {
        assert_eq!(std::fs::read_to_string(dir.path().join(f)).unwrap().lines().count(), 1, "{f}");
    }
    assert_eq!(flaw_stats_csv(&[]).lines().count(), 1);
}

fn transcript() -> AgentTranscript {
    let mut t = AgentTranscript::new(Role::FailureAnalysis, Observation::text("start"));
    let inv = ActionInvocation::new(ActionName::ViewFile).with_arg("path", "a;b}\nc");
    t.push(AgentStep { index: 1, thought: "look".into(), action: StepAction::Invoke { invocation: inv }, observation: Observation::text("x") })
        .unwrap();
    t.push(AgentStep { index: 2, thought: String::new(), action: StepAction::Final, observation: Observation::Final { payload: "done".into() } })
        .unwrap();
    t.finish(Terminal::Completed, None).unwrap();
    t
}

#[test]
fn transcript_jsonl_is_header_plus_steps_and_round_trips() {
    let t = transcript();
    let text = transcript_jsonl("analysis-x-m", &t);
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().next().unwrap().contains("\"transcript_ref\":\"analysis-x-m\""));
    let dir = tempfile::tempdir().unwrap();
    let path = write_transcript(dir.path(), "analysis-x-m", &t).unwrap();
    let (r, back) = read_transcript(&path).unwrap();
    assert_eq!(r, "analysis-x-m");
    assert_eq!(back, t);
}

#[test]
fn run_dirs_are_timestamped_and_unique() {
    let tmp = tempfile::tempdir().unwrap();
    let a = create_run_dir(tmp.path()).unwrap();
    let b = create_run_dir(tmp.path()).unwrap();
    assert_ne!(a, b);
    let name = a.file_name().unwrap().to_string_lossy().to_string();
    assert_eq!(name.len(), 16);
    assert!(name.ends_with('Z') && name.as_bytes()[8] == b'T');
}

fn proposals(root: &std::path::Path) -> Vec<ReviewedProposal> {
    let s = suite::load_suite(&root.join("suite")).unwrap();
    ["and_gate", "bin2gray", "xor_gate"]
        .iter()
        .map(|id| {
            let c = s.case(id).unwrap();
            ReviewedProposal {
                proposal: RevisionProposal {
                    case_id: c.case_id.clone(),
                    original_description: c.description.clone(),
                    revised_description: format!("{}Revised.\n", c.description),
                    rationale: "clarify".into(),
                    transcript_ref: format!("revision-{id}"),
                },
                review: ReviewResult::new(*id != "bin2gray", vec![], "ok"),
            }
        })
        .collect()
}

#[test]
fn approval_applies_logs_and_resumes() {
    let (_tmp, root) = common::fixture_copy();
    let sroot = root.join("suite");
    let items = proposals(&root);
    let log = root.join("decisions.jsonl");
    let clock = || "2026-01-01T00:00:00Z".to_string();

    // First session: accept and_gate, then quit.
    let mut out = Vec::new();
    let s = interactive_approve(&items, &sroot, "alice", &log, Cursor::new("y\nq\n"), &mut out, &clock).unwrap();
    assert_eq!((s.accepted, s.not_reviewed_ok, s.quit), (1, 1, true));
    let text = String::from_utf8(out).unwrap();
    assert!(text.contains("+Revised.") && text.contains("--- description.txt (current)"));

    // Second session resumes at xor_gate and edits it.
    let s = interactive_approve(&items, &sroot, "alice", &log, Cursor::new("maybe\ne\nHand written.\n.\n"), Vec::new(), &clock).unwrap();
    assert_eq!((s.skipped, s.edited, s.quit), (1, 1, false));

    let records: Vec<DecisionRecord> = suite::read_jsonl(&log).unwrap();
    assert_eq!(records.iter().map(|r| r.decision).collect::<Vec<_>>(), [Decision::Accepted, Decision::Edited]);
    assert_eq!(records[0].proposal_hash, proposal_hash(&items[0].proposal));

    let reloaded = suite::load_suite(&sroot).unwrap();
    assert!(reloaded.case("and_gate").unwrap().description.ends_with("Revised.\n"));
    assert_eq!(reloaded.case("xor_gate").unwrap().description, "Hand written.\n");
    assert_eq!(reloaded.case("xor_gate").unwrap().revision_history[0].approver, "alice");
    assert!(reloaded.case("bin2gray").unwrap().revision_history.is_empty());

    // Nothing left to decide.
    let s = interactive_approve(&items, &sroot, "alice", &log, Cursor::new(""), Vec::new(), &clock).unwrap();
    assert_eq!(s.skipped, 2);
}

#[test]
fn rejection_records_reason_and_leaves_suite_unchanged() {
    let (_tmp, root) = common::fixture_copy();
    let sroot = root.join("suite");
    let items = proposals(&root);
    let log = root.join("d.jsonl");
    let before = suite::load_suite(&sroot).unwrap();
    let s = interactive_approve(&items, &sroot, "bob", &log, Cursor::new("n\nwording\nn\n\n"), Vec::new(), &|| "t".into()).unwrap();
    assert_eq!(s.rejected, 2);
    assert_eq!(suite::load_suite(&sroot).unwrap(), before);
    let records: Vec<DecisionRecord> = suite::read_jsonl(&log).unwrap();
    assert_eq!(records[0].reason.as_deref(), Some("wording"));
}
