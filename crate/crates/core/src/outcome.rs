//! Evaluation outcomes, pass@1 and consistent-failure aggregation.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::sim::SimResult;

/// Variant id of an evaluation against the case's current description.
pub const ORIGINAL_VARIANT: &str = "orig";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalOutcome {
    pub case_id: String,
    pub model_id: String,
    pub variant_id: String,
    pub generated_source: String,
    pub sim: SimResult,
    /// 1-based.
    pub attempt_index: u32,
}

impl EvalOutcome {
    pub fn passed(&self) -> bool {
        self.sim.functional_pass
    }

    pub fn is_original(&self) -> bool {
        self.variant_id == ORIGINAL_VARIANT
    }

    /// Deterministic merge order.
    pub fn sort_key(&self) -> (&str, &str, &str, u32) {
        (&self.model_id, &self.case_id, &self.variant_id, self.attempt_index)
    }
}

pub fn sort_outcomes(outcomes: &mut [EvalOutcome]) {
    outcomes.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
}

/// `(passed, total)` over the first attempt of each original-variant case
/// evaluated for `model_id`.
pub fn pass_at_1_counts(outcomes: &[EvalOutcome], model_id: &str) -> (usize, usize) {
    let mut first: BTreeMap<&str, bool> = BTreeMap::new();
    for o in outcomes.iter().filter(|o| o.model_id == model_id && o.is_original() && o.attempt_index == 1) {
        first.insert(&o.case_id, o.passed());
    }
    (first.values().filter(|p| **p).count(), first.len())
}

pub fn pass_at_1(outcomes: &[EvalOutcome], model_id: &str) -> f64 {
    match pass_at_1_counts(outcomes, model_id) {
        (_, 0) => 0.0,
        (p, n) => p as f64 / n as f64,
    }
}

pub fn model_ids(outcomes: &[EvalOutcome]) -> Vec<String> {
    outcomes.iter().map(|o| o.model_id.clone()).collect::<BTreeSet<_>>().into_iter().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureSet {
    pub case_ids: Vec<String>,
    pub per_case_fail_fraction: BTreeMap<String, f64>,
    pub models_considered: Vec<String>,
    pub threshold: f64,
}

impl FailureSet {
    pub fn contains(&self, case_id: &str) -> bool {
        self.case_ids.iter().any(|c| c == case_id)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AggregateError {
    #[error("threshold {0} is outside (0, 1]")]
    BadThreshold(f64),
    #[error("model `{0}` has no outcomes")]
    UnknownModel(String),
    #[error("model `{model_id}` has no outcome for case `{case_id}`")]
    Incomplete { model_id: String, case_id: String },
}

pub const DEFAULT_FAILURE_THRESHOLD: f64 = 1.0;

/// Cases that at least `threshold` of the considered models fail.
///
/// A model fails a case when every one of its attempts on the original
/// description failed. `models = None` considers every model present.
pub fn aggregate_consistent_failures(
    outcomes: &[EvalOutcome],
    models: Option<&[String]>,
    threshold: f64,
) -> Result<FailureSet, AggregateError> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(AggregateError::BadThreshold(threshold));
    }
    let originals: Vec<&EvalOutcome> = outcomes.iter().filter(|o| o.is_original()).collect();
    let present: BTreeSet<&str> = originals.iter().map(|o| o.model_id.as_str()).collect();
    let considered: Vec<String> = match models {
        Some(list) => {
            let set: BTreeSet<&str> = list.iter().map(String::as_str).collect();
            if let Some(m) = set.iter().find(|m| !present.contains(**m)) {
                return Err(AggregateError::UnknownModel((*m).into()));
            }
            set.into_iter().map(String::from).collect()
        }
        None => present.iter().map(|m| String::from(*m)).collect(),
    };

    // (case, model) -> all attempts failed
    let mut failed: BTreeMap<(&str, &str), bool> = BTreeMap::new();
    for o in &originals {
        if !considered.contains(&o.model_id) {
            continue;
        }
        let entry = failed.entry((o.case_id.as_str(), o.model_id.as_str())).or_insert(true);
        *entry &= !o.passed();
    }
    let cases: BTreeSet<&str> = failed.keys().map(|(c, _)| *c).collect();

    let mut per_case = BTreeMap::new();
    let mut case_ids = Vec::new();
    for case in cases {
        let mut failing = 0usize;
        for model in &considered {
            match failed.get(&(case, model.as_str())) {
                Some(true) => failing += 1,
                Some(false) => {}
                None => return Err(AggregateError::Incomplete { model_id: model.clone(), case_id: case.into() }),
            }
        }
        let n = considered.len();
        let fraction = failing as f64 / n as f64;
        per_case.insert(String::from(case), fraction);
        // tolerance so a threshold like 2.0 / 3.0 still admits 2 of 3
        if failing as f64 >= threshold * n as f64 - 1e-9 {
            case_ids.push(String::from(case));
        }
    }
    Ok(FailureSet { case_ids, per_case_fail_fraction: per_case, models_considered: considered, threshold })
}
