//! Multi-model evaluation of suite cases and their description variants.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use benchkeeper_core::outcome::{sort_outcomes, ORIGINAL_VARIANT};
use benchkeeper_core::{BenchmarkCase, BenchmarkSuite, EvalOutcome, SimResult};

use crate::backend::{run_evaluation, BackendConfig, BackendError};
use crate::provider::{ModelProvider, ProviderError};
use crate::workspace::{Workspace, WorkspaceError};

pub const GENERATION_PROMPT_VERSION: &str = "gen-v1";

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error("model `{0}` returned an empty reply")]
    EmptyReply(String),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Workspace(#[from] WorkspaceError),
    #[error("attempts must be at least 1")]
    NoAttempts,
}

pub fn generation_prompt(description: &str) -> String {
    format!(
        "PROMPT_VERSION: {GENERATION_PROMPT_VERSION}\n\
         You are an RTL design engineer. Write a synthesizable Verilog module that implements the \
         design description below. Reply with the complete module in a single fenced code block.\n\n\
         DESCRIPTION:\n{}\nEND DESCRIPTION\n",
        description.trim_end()
    )
}

/// First fenced code block of `reply`, or the whole reply if it has none.
pub fn extract_code(reply: &str) -> String {
    let mut lines = reply.lines();
    while let Some(line) = lines.next() {
        if line.trim_start().starts_with("```") {
            let body: Vec<&str> = lines.by_ref().take_while(|l| !l.trim_start().starts_with("```")).collect();
            return body.join("\n") + "\n";
        }
    }
    reply.to_string()
}

pub fn generate_rtl(model: &dyn ModelProvider, description: &str) -> Result<String, EvalError> {
    let reply = model.complete(&generation_prompt(description))?;
    if reply.trim().is_empty() {
        return Err(EvalError::EmptyReply(model.id().into()));
    }
    Ok(extract_code(&reply))
}

/// One description to evaluate: the case's own or a rewritten variant.
#[derive(Debug, Clone)]
pub struct EvalTask<'a> {
    pub case: &'a BenchmarkCase,
    pub variant_id: String,
    pub description: String,
}

pub fn original_tasks(suite: &BenchmarkSuite) -> Vec<EvalTask<'_>> {
    suite
        .cases
        .iter()
        .map(|c| EvalTask { case: c, variant_id: ORIGINAL_VARIANT.into(), description: c.description.clone() })
        .collect()
}

/// Generates and simulates one attempt. Provider failures are recorded as
/// a syntax failure so one bad reply does not abort a whole evaluation.
pub fn evaluate_task(model: &dyn ModelProvider, task: &EvalTask, backend: &BackendConfig, attempt: u32) -> Result<EvalOutcome, EvalError> {
    let (generated, sim) = match generate_rtl(model, &task.description) {
        Ok(code) => {
            let dir = tempfile::Builder::new().prefix("bk-eval-").tempdir().map_err(|e| BackendError::Io("tempdir".into(), e))?;
            let mut staged = task.case.clone();
            staged.description = task.description.clone();
            Workspace::stage(dir.path(), &staged, Some(&code), None, &[])?;
            let artifacts = run_evaluation(backend, dir.path(), &mut Vec::new())?;
            (code, artifacts.result)
        }
        Err(EvalError::Provider(e)) => (String::new(), SimResult::syntax_failure(format!("generation failed: {e}\n"))),
        Err(EvalError::EmptyReply(m)) => (String::new(), SimResult::syntax_failure(format!("model `{m}` returned an empty reply\n"))),
        Err(e) => return Err(e),
    };
    Ok(EvalOutcome {
        case_id: task.case.case_id.clone(),
        model_id: model.id().into(),
        variant_id: task.variant_id.clone(),
        generated_source: generated,
        sim,
        attempt_index: attempt,
    })
}

/// Evaluates every task `attempts` times with up to `workers` threads;
/// results are ordered by `(model, case, variant, attempt)`.
pub fn evaluate_tasks(
    model: &dyn ModelProvider,
    tasks: &[EvalTask],
    backend: &BackendConfig,
    attempts: u32,
    workers: usize,
) -> Result<Vec<EvalOutcome>, EvalError> {
    if attempts == 0 {
        return Err(EvalError::NoAttempts);
    }
    let jobs: Vec<(&EvalTask, u32)> = tasks.iter().flat_map(|t| (1..=attempts).map(move |a| (t, a))).collect();
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<EvalOutcome, EvalError>>>> = Mutex::new((0..jobs.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..workers.clamp(1, jobs.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some((task, attempt)) = jobs.get(i) else { break };
                let r = evaluate_task(model, task, backend, *attempt);
                results.lock().expect("not poisoned")[i] = Some(r);
            });
        }
    });
    let mut outcomes = results
        .into_inner()
        .expect("not poisoned")
        .into_iter()
        .map(|r| r.expect("every job ran"))
        .collect::<Result<Vec<_>, _>>()?;
    sort_outcomes(&mut outcomes);
    Ok(outcomes)
}

/// Evaluates the original descriptions of `suite` for one model.
pub fn evaluate(model: &dyn ModelProvider, suite: &BenchmarkSuite, backend: &BackendConfig, attempts: u32, workers: usize) -> Result<Vec<EvalOutcome>, EvalError> {
    evaluate_tasks(model, &original_tasks(suite), backend, attempts, workers)
}
