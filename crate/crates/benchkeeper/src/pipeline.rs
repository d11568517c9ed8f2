//! Batch drivers that run one pipeline stage over a whole suite.
//!
//! Each stage is deterministic given its inputs: cases are visited in id
//! order, models in id order, and per-item failures are logged rather than
//! aborting the batch.

use std::collections::BTreeMap;
use std::path::Path;

use benchkeeper_core::outcome::{sort_outcomes, FailureSet};
use benchkeeper_core::style::StyleTemplate;
use benchkeeper_core::transcript::AgentTranscript;
use benchkeeper_core::{BenchmarkSuite, EvalOutcome, FlawVerdict, RevisionProposal};

use crate::approve::ReviewedProposal;
use crate::backend::BackendConfig;
use crate::eval::{evaluate_tasks, original_tasks, EvalError};
use crate::flaw::{analyze_failure, propose_revision, review_revision, transcript_ref, AgentOptions, FlawError};
use crate::provider::ModelProvider;
use crate::rewrite::{generate_variants, load_variants, variant_tasks, write_variants, RewrittenDescription};
use crate::run::write_transcript;
use crate::suite::{self, SuiteError};

#[derive(Debug)]
pub struct Stage<T> {
    pub items: Vec<T>,
    pub transcripts: Vec<(String, AgentTranscript)>,
    pub log: Vec<String>,
}

impl<T> Default for Stage<T> {
    fn default() -> Self {
        Stage { items: Vec::new(), transcripts: Vec::new(), log: Vec::new() }
    }
}

impl<T: serde::Serialize> Stage<T> {
    /// Writes `<name>.jsonl`, the transcripts and, if non-empty, `<name>.log`.
    pub fn save(&self, dir: &Path, name: &str) -> Result<(), SuiteError> {
        suite::write_jsonl_file(&dir.join(format!("{name}.jsonl")), &self.items)?;
        for (r, t) in &self.transcripts {
            write_transcript(dir, r, t)?;
        }
        if !self.log.is_empty() {
            let path = dir.join(format!("{name}.log"));
            suite::write_atomic(&path, (self.log.join("\n") + "\n").as_bytes()).map_err(suite::io_err(&path))?;
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Flaw(#[from] FlawError),
    #[error(transparent)]
    Suite(#[from] SuiteError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

fn fatal(e: &FlawError) -> bool {
    matches!(e, FlawError::Io(_))
}

/// Analyzes the first failing original attempt of every model on every
/// case of the failure set. Cases without usable reference code get an
/// UNKNOWN verdict.
pub fn analyze_all(
    suite: &BenchmarkSuite,
    outcomes: &[EvalOutcome],
    failures: &FailureSet,
    provider: &dyn ModelProvider,
    opts: &AgentOptions,
) -> Result<Stage<FlawVerdict>, FlawError> {
    let mut sorted = outcomes.to_vec();
    sort_outcomes(&mut sorted);
    let mut picked: BTreeMap<(&str, &str), &EvalOutcome> = BTreeMap::new();
    for o in sorted.iter().filter(|o| o.is_original() && !o.passed() && failures.contains(&o.case_id)) {
        if failures.models_considered.contains(&o.model_id) {
            picked.entry((o.case_id.as_str(), o.model_id.as_str())).or_insert(o);
        }
    }
    let mut stage = Stage::default();
    for ((case_id, model_id), outcome) in picked {
        let Some(case) = suite.case(case_id) else {
            stage.log.push(format!("outcome refers to unknown case `{case_id}`"));
            continue;
        };
        match analyze_failure(case, outcome, provider, opts) {
            Ok(a) => {
                stage.transcripts.push((a.verdict.transcript_ref.clone(), a.transcript));
                stage.items.push(a.verdict);
            }
            Err(e) if fatal(&e) => return Err(e),
            Err(e) => {
                stage.log.push(format!("{case_id}/{model_id}: {e}"));
                stage.items.push(FlawVerdict::unknown(case_id, model_id, &e.to_string()));
            }
        }
    }
    Ok(stage)
}

/// One proposal per flagged case, driven by its first flagging verdict.
pub fn revise_all(
    suite: &BenchmarkSuite,
    verdicts: &[FlawVerdict],
    provider: &dyn ModelProvider,
    opts: &AgentOptions,
) -> Result<Stage<RevisionProposal>, FlawError> {
    let mut first: BTreeMap<&str, &FlawVerdict> = BTreeMap::new();
    let mut flagged: Vec<&FlawVerdict> = verdicts.iter().filter(|v| v.is_flaw).collect();
    flagged.sort_by(|a, b| (&a.case_id, &a.model_id).cmp(&(&b.case_id, &b.model_id)));
    for v in flagged {
        first.entry(v.case_id.as_str()).or_insert(v);
    }
    let mut stage = Stage::default();
    for (case_id, verdict) in first {
        let Some(case) = suite.case(case_id) else {
            stage.log.push(format!("verdict refers to unknown case `{case_id}`"));
            continue;
        };
        match propose_revision(case, verdict, provider, opts) {
            Ok(p) => {
                stage.transcripts.push((p.proposal.transcript_ref.clone(), p.transcript));
                stage.items.push(p.proposal);
            }
            Err(e) if fatal(&e) => return Err(e),
            Err(e) => stage.log.push(format!("{case_id}: {e}")),
        }
    }
    Ok(stage)
}

pub fn review_all(
    suite: &BenchmarkSuite,
    proposals: &[RevisionProposal],
    provider: &dyn ModelProvider,
    opts: &AgentOptions,
) -> Result<Stage<ReviewedProposal>, FlawError> {
    let mut stage = Stage::default();
    for p in proposals {
        let Some(case) = suite.case(&p.case_id) else {
            stage.log.push(format!("proposal refers to unknown case `{}`", p.case_id));
            continue;
        };
        if let Err(e) = p.validate() {
            stage.log.push(format!("{}: invalid proposal: {e}", p.case_id));
            continue;
        }
        match review_revision(case, p, provider, opts) {
            Ok(r) => {
                if let Some(t) = r.transcript {
                    stage.transcripts.push((transcript_ref("review", &p.case_id, provider.id()), t));
                }
                stage.items.push(ReviewedProposal { proposal: p.clone(), review: r.result });
            }
            Err(e) if fatal(&e) => return Err(e),
            Err(e) => stage.log.push(format!("{}: {e}", p.case_id)),
        }
    }
    Ok(stage)
}

/// Generates, reviews and stores style variants for every case.
pub fn rewrite_all(
    suite: &BenchmarkSuite,
    suite_root: &Path,
    styles: &[StyleTemplate],
    k: usize,
    updater: &dyn ModelProvider,
    reviewer: &dyn ModelProvider,
    opts: &AgentOptions,
) -> Result<Stage<RewrittenDescription>, PipelineError> {
    let mut stage = Stage::default();
    for case in &suite.cases {
        match generate_variants(case, styles, k, updater, reviewer, opts) {
            Ok(batch) => {
                write_variants(&suite_root.join(&case.dir), &batch.variants)?;
                stage.log.extend(batch.log);
                stage.transcripts.extend(batch.transcripts);
                stage.items.extend(batch.variants);
            }
            Err(e) if fatal(&e) => return Err(e.into()),
            Err(e) => stage.log.push(format!("{}: {e}", case.case_id)),
        }
    }
    Ok(stage)
}

/// Evaluates every model on the original descriptions and on every
/// approved variant stored beside the cases.
pub fn evaluate_with_variants(
    models: &[Box<dyn ModelProvider>],
    suite: &BenchmarkSuite,
    suite_root: &Path,
    backend: &BackendConfig,
    attempts: u32,
    workers: usize,
) -> Result<Vec<EvalOutcome>, PipelineError> {
    let mut variants = Vec::new();
    for case in &suite.cases {
        variants.push(load_variants(&suite_root.join(&case.dir), &case.case_id)?);
    }
    let mut tasks = original_tasks(suite);
    for (case, vs) in suite.cases.iter().zip(&variants) {
        tasks.extend(variant_tasks(case, vs));
    }
    let mut all = Vec::new();
    for model in models {
        all.extend(evaluate_tasks(model.as_ref(), &tasks, backend, attempts, workers)?);
    }
    sort_outcomes(&mut all);
    Ok(all)
}
