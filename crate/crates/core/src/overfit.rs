//! Overfitting classification of paired original/variant outcomes.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::outcome::{EvalOutcome, ORIGINAL_VARIANT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum OverfitClass {
    Tp,
    FnOverfit,
    FpRobust,
    Tn,
}

impl OverfitClass {
    pub fn from_passes(orig_pass: bool, variant_pass: bool) -> Self {
        match (orig_pass, variant_pass) {
            (true, true) => OverfitClass::Tp,
            (true, false) => OverfitClass::FnOverfit,
            (false, true) => OverfitClass::FpRobust,
            (false, false) => OverfitClass::Tn,
        }
    }

    pub fn orig_pass(self) -> bool {
        matches!(self, OverfitClass::Tp | OverfitClass::FnOverfit)
    }

    pub fn variant_pass(self) -> bool {
        matches!(self, OverfitClass::Tp | OverfitClass::FpRobust)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverfitCell {
    pub model_id: String,
    pub case_id: String,
    pub variant_id: String,
    pub cls: OverfitClass,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OverfitError {
    #[error("outcomes belong to different models or cases")]
    Mismatched,
    #[error("first outcome must be on the original description")]
    NotOriginal,
    #[error("second outcome must be on a rewritten variant")]
    NotVariant,
    #[error("cell for model `{found}` passed to matrix of `{expected}`")]
    ForeignModel { expected: String, found: String },
    #[error("duplicate cell for case `{case_id}`, variant `{variant_id}`")]
    DuplicateCell { case_id: String, variant_id: String },
    #[error("case `{0}` has cells that disagree on the original outcome")]
    InconsistentOriginal(String),
}

pub fn classify_overfit(orig: &EvalOutcome, variant: &EvalOutcome) -> Result<OverfitCell, OverfitError> {
    if orig.model_id != variant.model_id || orig.case_id != variant.case_id {
        return Err(OverfitError::Mismatched);
    }
    if orig.variant_id != ORIGINAL_VARIANT {
        return Err(OverfitError::NotOriginal);
    }
    if variant.variant_id == ORIGINAL_VARIANT {
        return Err(OverfitError::NotVariant);
    }
    Ok(OverfitCell {
        model_id: orig.model_id.clone(),
        case_id: orig.case_id.clone(),
        variant_id: variant.variant_id.clone(),
        cls: OverfitClass::from_passes(orig.passed(), variant.passed()),
    })
}

/// Pairs first-attempt variant outcomes with their original outcome.
///
/// Variants whose original outcome is missing are skipped; cells are ordered
/// by `(model, case, variant)`.
pub fn cells_from_outcomes(outcomes: &[EvalOutcome]) -> Vec<OverfitCell> {
    let mut originals: BTreeMap<(&str, &str), &EvalOutcome> = BTreeMap::new();
    let mut variants: BTreeMap<(&str, &str, &str), &EvalOutcome> = BTreeMap::new();
    for o in outcomes.iter().filter(|o| o.attempt_index == 1) {
        if o.is_original() {
            originals.insert((&o.model_id, &o.case_id), o);
        } else {
            variants.insert((&o.model_id, &o.case_id, &o.variant_id), o);
        }
    }
    variants
        .iter()
        .filter_map(|((m, c, _), v)| originals.get(&(*m, *c)).and_then(|o| classify_overfit(o, v).ok()))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantRate {
    pub variant_id: String,
    pub passed: usize,
    pub total: usize,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverfitMatrix {
    pub model_id: String,
    pub tp: usize,
    pub fn_overfit: usize,
    pub fp_robust: usize,
    pub tn: usize,
    pub variant_rates: Vec<VariantRate>,
    pub original_rate: Option<f64>,
    pub mean_variant_rate: Option<f64>,
    pub best_variant_rate: Option<f64>,
    pub worst_variant_rate: Option<f64>,
    /// Cases that pass the original and fail at least one variant.
    pub overfit_cases: Vec<String>,
    /// FN / (TP + FN). Auxiliary score, not one of the matrix counts.
    pub aux_overfit_ratio: Option<f64>,
}

impl OverfitMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.fn_overfit + self.fp_robust + self.tn
    }

    pub fn count(&self, cls: OverfitClass) -> usize {
        match cls {
            OverfitClass::Tp => self.tp,
            OverfitClass::FnOverfit => self.fn_overfit,
            OverfitClass::FpRobust => self.fp_robust,
            OverfitClass::Tn => self.tn,
        }
    }
}

pub fn build_matrix(model_id: &str, cells: &[OverfitCell]) -> Result<OverfitMatrix, OverfitError> {
    let mut seen = BTreeSet::new();
    let mut counts = [0usize; 4];
    let mut per_variant: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    let mut orig: BTreeMap<&str, bool> = BTreeMap::new();
    let mut overfit_cases = BTreeSet::new();
    for cell in cells {
        if cell.model_id != model_id {
            return Err(OverfitError::ForeignModel { expected: model_id.into(), found: cell.model_id.clone() });
        }
        if !seen.insert((&cell.case_id, &cell.variant_id)) {
            return Err(OverfitError::DuplicateCell { case_id: cell.case_id.clone(), variant_id: cell.variant_id.clone() });
        }
        if *orig.entry(&cell.case_id).or_insert(cell.cls.orig_pass()) != cell.cls.orig_pass() {
            return Err(OverfitError::InconsistentOriginal(cell.case_id.clone()));
        }
        counts[cell.cls as usize] += 1;
        let entry = per_variant.entry(&cell.variant_id).or_default();
        entry.0 += cell.cls.variant_pass() as usize;
        entry.1 += 1;
        if cell.cls == OverfitClass::FnOverfit {
            overfit_cases.insert(cell.case_id.clone());
        }
    }
    let variant_rates: Vec<VariantRate> = per_variant
        .into_iter()
        .map(|(v, (passed, total))| VariantRate { variant_id: v.into(), passed, total, rate: passed as f64 / total as f64 })
        .collect();
    let rates = variant_rates.iter().map(|r| r.rate);
    let (best, worst) = rates.clone().fold((None, None), |(b, w): (Option<f64>, Option<f64>), r| {
        (Some(b.map_or(r, |b| b.max(r))), Some(w.map_or(r, |w| w.min(r))))
    });
    let mean = (!variant_rates.is_empty()).then(|| rates.sum::<f64>() / variant_rates.len() as f64);
    let original_rate = (!orig.is_empty()).then(|| orig.values().filter(|p| **p).count() as f64 / orig.len() as f64);
    let [tp, fn_overfit, fp_robust, tn] = counts;
    Ok(OverfitMatrix {
        model_id: model_id.into(),
        tp,
        fn_overfit,
        fp_robust,
        tn,
        variant_rates,
        original_rate,
        mean_variant_rate: mean,
        best_variant_rate: best,
        worst_variant_rate: worst,
        overfit_cases: overfit_cases.into_iter().collect(),
        aux_overfit_ratio: (tp + fn_overfit > 0).then(|| fn_overfit as f64 / (tp + fn_overfit) as f64),
    })
}

/// One matrix per model present in `cells`, ordered by model id.
pub fn build_matrices(cells: &[OverfitCell]) -> Vec<OverfitMatrix> {
    let models: BTreeSet<&str> = cells.iter().map(|c| c.model_id.as_str()).collect();
    models
        .into_iter()
        .filter_map(|m| {
            let mine: Vec<OverfitCell> = cells.iter().filter(|c| c.model_id == m).cloned().collect();
            build_matrix(m, &mine).ok()
        })
        .collect()
}
