//! Failure analysis, revision proposals and revision review.

use std::cell::Cell;
use std::collections::BTreeSet;
use std::sync::OnceLock;

use benchkeeper_core::hdl;
use benchkeeper_core::leakage::detect_leakage;
use benchkeeper_core::taxonomy::{FlawCategory, MinorCategory};
use benchkeeper_core::transcript::{AgentTranscript, Observation, Role, StepAction, Terminal};
use benchkeeper_core::verdict::{
    missing_identifiers, parse_flaw_payload, parse_judgment, parse_review_payload, protected_vocabulary, FlawVerdict,
    ReviewResult, RevisionProposal,
};
use benchkeeper_core::{ActionName, BenchmarkCase, EvalOutcome};
use regex::Regex;

use crate::actions::CaseEnv;
use crate::agent::{run_agent, Admission, AgentError, AgentSpec};
use crate::backend::BackendConfig;
use crate::suite;
use crate::workspace::{Workspace, WorkspaceError};

#[derive(Debug, Clone)]
pub struct AgentOptions {
    pub max_iters: usize,
    pub leakage_n: usize,
    pub backend: BackendConfig,
}

impl Default for AgentOptions {
    fn default() -> Self {
        AgentOptions {
            max_iters: crate::agent::DEFAULT_MAX_ITERS,
            leakage_n: benchkeeper_core::leakage::DEFAULT_MIN_TOKENS,
            backend: BackendConfig::builtin(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum FlawError {
    #[error("case `{0}` has no reference code and none could be extracted from its testbench")]
    MissingReference(String),
    #[error("outcome for case `{0}` passed; only failures are analyzed")]
    OutcomePassed(String),
    #[error("verdict for case `{0}` is not a flaw")]
    NotAFlaw(String),
    #[error("revision agent left the description of `{0}` unchanged")]
    NoRevision(String),
    #[error("agent failed: {0}")]
    Provider(String),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    Workspace(#[from] WorkspaceError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

pub const ANALYSIS_PLAN: [ActionName; 3] = [ActionName::CompareCodes, ActionName::CheckInstruction, ActionName::Reason];

const ANALYSIS_INSTRUCTIONS: &str = "\
You analyze why LLM-generated RTL code failed a benchmark case. Follow this plan exactly.
Iteration 1: COMPARE_CODES to compare the generated code with the testbench and reference code.
Iteration 2: CHECK_INSTRUCTION to read the design description.
Iteration 3: judge whether the generated code correctly implements the description. Write
`CODE_CORRECT: YES` or `CODE_CORRECT: NO` in your THOUGHT. If YES, take the REASON action.
When reasoning, answer in exactly this form:
IS_FLAW: YES or NO
CATEGORY: one of UNDEFINED_MODULE_NAME, UNCLEAR_PORT_TYPE, SYNTAX_ERROR_IN_EXAMPLE,
  REGISTER_INITIALIZATION, TRIGGER_CONDITION, MISSING_IMPLEMENTATION, KMAP, FSM, OTHER
REASON: why the description conflicts with or under-specifies the testbench";

const REVISION_INSTRUCTIONS: &str = "\
You revise the design description of a flawed benchmark case so that it is unambiguous and
consistent with its testbench. Read the current description with CHECK_INSTRUCTION, then write the
complete revised description with REVISE { text=... }. Change only what the flaw requires and keep
the original wording elsewhere. Never quote or paste code from the reference implementation or the
testbench. Finish with FINAL: followed by the rationale for the change.";

const REVIEW_INSTRUCTIONS: &str = "\
You review a proposed revision of a benchmark design description against two rules.
Rule 1: the revision must not change the design's semantics. Module name, ports, widths and
behaviour stay as the testbench expects.
Rule 2: the revision must not leak code from the reference implementation or testbench.
Finish with FINAL: APPROVE, or FINAL: REJECT: followed by your notes.";

fn module_blocks() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?s)\bmodule\s+([A-Za-z_][A-Za-z0-9_$]*).*?\bendmodule\b").expect("valid regex"))
}

/// The case's reference code, falling back to non-testbench module blocks
/// found in the testbench file.
pub fn reference_code(case: &BenchmarkCase) -> Option<String> {
    if let Some(r) = case.reference_source.as_ref().filter(|r| !r.trim().is_empty()) {
        return Some(r.clone());
    }
    let blocks: Vec<&str> = module_blocks()
        .captures_iter(&case.testbench_source)
        .filter(|c| {
            let name = c[1].to_ascii_lowercase();
            !name.contains("tb") && !name.contains("test")
        })
        .map(|c| c.get(0).expect("whole match").as_str())
        .collect();
    (!blocks.is_empty()).then(|| blocks.join("\n\n") + "\n")
}

fn staging_dir() -> Result<tempfile::TempDir, FlawError> {
    Ok(tempfile::Builder::new().prefix("bk-agent-").tempdir()?)
}

fn outcome_observation(outcome: &EvalOutcome) -> Observation {
    let s = &outcome.sim;
    Observation::text(format!(
        "Evaluation results for case `{}` (model `{}`, variant `{}`, attempt {}):\n\
         syntax_pass={} functional_pass={} failed_vectors={:?}\nLog:\n{}",
        outcome.case_id,
        outcome.model_id,
        outcome.variant_id,
        outcome.attempt_index,
        s.syntax_pass,
        s.functional_pass,
        s.failed_vector_indices,
        s.log.trim_end()
    ))
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub verdict: FlawVerdict,
    pub transcript: AgentTranscript,
}

pub fn transcript_ref(kind: &str, case_id: &str, model_id: &str) -> String {
    let id: String = format!("{kind}-{case_id}-{model_id}")
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' { c } else { '_' })
        .collect();
    id
}

/// Runs the three-iteration analysis plan on one failing outcome.
pub fn analyze_failure(
    case: &BenchmarkCase,
    outcome: &EvalOutcome,
    provider: &dyn crate::provider::ModelProvider,
    opts: &AgentOptions,
) -> Result<Analysis, FlawError> {
    if outcome.sim.functional_pass {
        return Err(FlawError::OutcomePassed(case.case_id.clone()));
    }
    let reference = reference_code(case).ok_or_else(|| FlawError::MissingReference(case.case_id.clone()))?;
    let dir = staging_dir()?;
    let ws = Workspace::stage(dir.path(), case, Some(&outcome.generated_source), Some(&reference), &[])?;
    let position = Cell::new(0usize);
    let guard = |_step: usize, thought: &str, action: &benchkeeper_core::ActionInvocation| {
        let pos = position.get();
        if pos == 2 && !parse_judgment(thought) {
            return Admission::Halt("model defect: generated code judged incorrect".into());
        }
        match ANALYSIS_PLAN.get(pos) {
            Some(expected) if *expected == action.name => {
                position.set(pos + 1);
                Admission::Accept
            }
            Some(expected) => Admission::Reject(format!("the analysis plan requires {expected} at this point")),
            None => Admission::Reject("the analysis plan is complete".into()),
        }
    };
    let mut env = CaseEnv::new(ws, opts.backend.clone()).with_admission(guard).complete_on(ActionName::Reason);
    let spec = AgentSpec {
        role: Role::FailureAnalysis,
        instructions: ANALYSIS_INSTRUCTIONS,
        action_set: &ANALYSIS_PLAN,
        max_iters: opts.max_iters,
    };
    let transcript = run_agent(&spec, outcome_observation(outcome), provider, &mut env)?;
    let verdict = verdict_from_transcript(&case.case_id, &outcome.model_id, &transcript)?;
    Ok(Analysis { verdict, transcript })
}

fn verdict_from_transcript(case_id: &str, model_id: &str, t: &AgentTranscript) -> Result<FlawVerdict, FlawError> {
    let tref = transcript_ref("analysis", case_id, model_id);
    if t.terminal == Some(Terminal::ProviderError) {
        return Err(FlawError::Provider(t.error.clone().unwrap_or_default()));
    }
    let reasoned = t.steps.iter().find(|s| s.action.invoked().is_some_and(|a| a.name == ActionName::Reason));
    if let Some(step) = reasoned {
        let Observation::Reasoning { payload } = &step.observation else {
            return Ok(FlawVerdict::no_flaw(case_id, model_id, "reasoning produced no result", true, &tref));
        };
        return Ok(match parse_flaw_payload(payload) {
            Ok(j) if j.is_flaw => {
                let category = j.category.unwrap_or_else(|| FlawCategory::from_minor(MinorCategory::Other));
                FlawVerdict::flaw(case_id, model_id, &j.reason, category, &tref)
            }
            Ok(j) => FlawVerdict::no_flaw(case_id, model_id, &j.reason, true, &tref),
            Err(e) => FlawVerdict::no_flaw(case_id, model_id, &format!("unusable reasoning result: {e}"), true, &tref),
        });
    }
    let reason = match (t.terminal, t.steps.last().map(|s| &s.action)) {
        (Some(Terminal::MaxIters), _) => format!("analysis reached no verdict within {} steps", t.steps.len()),
        (_, Some(StepAction::Halted { .. })) => "model defect".into(),
        _ => "model defect: analysis finished without reasoning".into(),
    };
    Ok(FlawVerdict::no_flaw(case_id, model_id, &reason, false, &tref))
}

#[derive(Debug, Clone)]
pub struct Proposal {
    pub proposal: RevisionProposal,
    pub transcript: AgentTranscript,
}

pub fn propose_revision(
    case: &BenchmarkCase,
    verdict: &FlawVerdict,
    provider: &dyn crate::provider::ModelProvider,
    opts: &AgentOptions,
) -> Result<Proposal, FlawError> {
    if !verdict.is_flaw {
        return Err(FlawError::NotAFlaw(case.case_id.clone()));
    }
    let dir = staging_dir()?;
    let reference = reference_code(case);
    let ws = Workspace::stage(dir.path(), case, None, reference.as_deref(), &[suite::DESCRIPTION])?;
    let mut env = CaseEnv::new(ws, opts.backend.clone());
    let o0 = Observation::text(format!(
        "Case `{}` was found flawed.\nCategory: {}\nReason: {}\n\
         Revise description.txt to remove the flaw. Do not quote or paste any code from the reference \
         implementation or the testbench.",
        case.case_id, verdict.category, verdict.reason
    ));
    let actions = [ActionName::CheckInstruction, ActionName::ViewFile, ActionName::Revise, ActionName::Reason];
    let spec = AgentSpec { role: Role::DescriptionRevision, instructions: REVISION_INSTRUCTIONS, action_set: &actions, max_iters: opts.max_iters };
    let transcript = run_agent(&spec, o0, provider, &mut env)?;
    if transcript.terminal == Some(Terminal::ProviderError) {
        return Err(FlawError::Provider(transcript.error.clone().unwrap_or_default()));
    }
    let revised = env.ws.view_file(suite::DESCRIPTION)?;
    if revised == case.description {
        return Err(FlawError::NoRevision(case.case_id.clone()));
    }
    let rationale = transcript.final_payload().map(str::to_string).unwrap_or_else(|| format!("addresses {}: {}", verdict.category, verdict.reason));
    Ok(Proposal {
        proposal: RevisionProposal {
            case_id: case.case_id.clone(),
            original_description: case.description.clone(),
            revised_description: revised,
            rationale,
            transcript_ref: transcript_ref("revision", &case.case_id, &verdict.model_id),
        },
        transcript,
    })
}

/// Names a rewrite must keep: module and port names of the reference
/// design plus the expected module name.
pub fn protected_names(case: &BenchmarkCase) -> BTreeSet<String> {
    let mut names = BTreeSet::new();
    if let Some(m) = &case.expected_module_name {
        names.insert(m.clone());
    }
    if let Some(modules) = reference_code(case).and_then(|r| hdl::parse_modules(&r).ok()) {
        for m in modules {
            names.insert(m.name.clone());
            names.extend(m.ports.iter().map(|p| p.name.clone()));
        }
    }
    names
}

#[derive(Debug, Clone)]
pub struct Review {
    pub result: ReviewResult,
    pub transcript: Option<AgentTranscript>,
}

/// Checks a revised description against the two review rules: leakage
/// first, then the identifier guard and the reviewer agent.
pub fn review_text(
    case: &BenchmarkCase,
    revised: &str,
    provider: &dyn crate::provider::ModelProvider,
    opts: &AgentOptions,
) -> Result<Review, FlawError> {
    let reference = reference_code(case).unwrap_or_default();
    let spans = detect_leakage(revised, &reference, opts.leakage_n);
    let vocabulary = protected_vocabulary(&case.description, &protected_names(case));
    let missing = missing_identifiers(&vocabulary, revised);
    let guard_note = (!missing.is_empty()).then(|| format!("revision drops identifiers: {}", missing.join(", ")));
    if !spans.is_empty() {
        let mut notes = format!("{} verbatim run(s) of reference code found; semantic review skipped", spans.len());
        if let Some(g) = &guard_note {
            notes = format!("{notes}; {g}");
        }
        return Ok(Review { result: ReviewResult::new(missing.is_empty(), spans, notes), transcript: None });
    }
    if let Some(g) = guard_note {
        return Ok(Review { result: ReviewResult::new(false, spans, g), transcript: None });
    }
    let dir = staging_dir()?;
    let ws = Workspace::stage(dir.path(), case, None, None, &[])?;
    let mut env = CaseEnv::new(ws, opts.backend.clone());
    let o0 = Observation::text(format!(
        "Original description of case `{}`:\n<<<\n{}\n>>>\nProposed revision:\n<<<\n{}\n>>>",
        case.case_id,
        case.description.trim_end(),
        revised.trim_end()
    ));
    let actions = [ActionName::CheckInstruction, ActionName::ViewFile, ActionName::Reason];
    let spec = AgentSpec { role: Role::DescriptionReview, instructions: REVIEW_INSTRUCTIONS, action_set: &actions, max_iters: opts.max_iters };
    let transcript = run_agent(&spec, o0, provider, &mut env)?;
    if transcript.terminal == Some(Terminal::ProviderError) {
        return Err(FlawError::Provider(transcript.error.clone().unwrap_or_default()));
    }
    let (ok, notes) = match transcript.final_payload() {
        Some(p) => parse_review_payload(p),
        None => (false, "reviewer reached no decision".into()),
    };
    Ok(Review { result: ReviewResult::new(ok, spans, notes), transcript: Some(transcript) })
}

pub fn review_revision(
    case: &BenchmarkCase,
    proposal: &RevisionProposal,
    provider: &dyn crate::provider::ModelProvider,
    opts: &AgentOptions,
) -> Result<Review, FlawError> {
    review_text(case, &proposal.revised_description, provider, opts)
}
