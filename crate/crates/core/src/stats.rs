//! Flaw statistics and accuracy deltas.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::outcome::{model_ids, pass_at_1_counts, EvalOutcome, FailureSet};
use crate::taxonomy::MajorCategory;
use crate::verdict::FlawVerdict;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ratio {
    pub count: usize,
    pub denom: usize,
}

impl Ratio {
    pub fn value(self) -> f64 {
        if self.denom == 0 { 0.0 } else { self.count as f64 / self.denom as f64 }
    }

    /// Percentage with one decimal, e.g. `7.7%`.
    pub fn percent(self) -> String {
        format_percent(self.value())
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.count, self.denom)
    }
}

pub fn format_percent(fraction: f64) -> String {
    format!("{:.1}%", fraction * 100.0)
}

/// Signed percentage-point delta, e.g. `+3.8%`.
pub fn format_delta(fraction: f64) -> String {
    let p = format!("{:.1}", fraction * 100.0);
    if p.starts_with('-') {
        format!("{p}%")
    } else if p == "0.0" {
        String::from("0.0%")
    } else {
        format!("+{p}%")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlawStats {
    pub suite_id: String,
    pub constant_fail: Ratio,
    pub flawed_total: Ratio,
    pub functional: usize,
    pub syntax: usize,
    pub diagram: usize,
    pub flawed_cases: Vec<String>,
}

/// Counts flawed cases among the constantly failing ones.
///
/// A case counts once even when several verdicts flag it; the first flagging
/// verdict in case-id order determines its category.
pub fn compute_flaw_stats(suite_id: &str, suite_size: usize, verdicts: &[FlawVerdict], failure_set: &FailureSet) -> FlawStats {
    let mut flawed: BTreeMap<&str, MajorCategory> = BTreeMap::new();
    for v in verdicts.iter().filter(|v| v.is_flaw && failure_set.contains(&v.case_id)) {
        flawed.entry(&v.case_id).or_insert(v.category.major());
    }
    let count = |m: MajorCategory| flawed.values().filter(|c| **c == m).count();
    FlawStats {
        suite_id: suite_id.into(),
        constant_fail: Ratio { count: failure_set.case_ids.iter().collect::<BTreeSet<_>>().len(), denom: suite_size },
        flawed_total: Ratio { count: flawed.len(), denom: suite_size },
        functional: count(MajorCategory::Functional),
        syntax: count(MajorCategory::Syntax),
        diagram: count(MajorCategory::Diagram),
        flawed_cases: flawed.keys().map(|c| String::from(*c)).collect(),
    }
}

impl FlawStats {
    pub fn is_consistent(&self) -> bool {
        self.functional + self.syntax + self.diagram == self.flawed_total.count
            && self.flawed_total.count <= self.constant_fail.count
            && self.flawed_total.denom == self.constant_fail.denom
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyDelta {
    pub model_id: String,
    pub suite_id: String,
    pub before: Ratio,
    pub after: Ratio,
    pub delta: f64,
}

impl AccuracyDelta {
    pub fn before_rate(&self) -> f64 {
        self.before.value()
    }

    pub fn after_rate(&self) -> f64 {
        self.after.value()
    }
}

/// pass@1 before and after, for every model evaluated in both sets.
pub fn compute_accuracy_delta(suite_id: &str, before: &[EvalOutcome], after: &[EvalOutcome]) -> Vec<AccuracyDelta> {
    let after_models = model_ids(after);
    model_ids(before)
        .into_iter()
        .filter(|m| after_models.contains(m))
        .map(|m| {
            let (bp, bn) = pass_at_1_counts(before, &m);
            let (ap, an) = pass_at_1_counts(after, &m);
            let before = Ratio { count: bp, denom: bn };
            let after = Ratio { count: ap, denom: an };
            AccuracyDelta { delta: after.value() - before.value(), model_id: m, suite_id: suite_id.into(), before, after }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxonomy::{FlawCategory, MinorCategory};
    use alloc::vec;

    #[test]
    fn ratio_formatting() {
        let r = Ratio { count: 11, denom: 143 };
        assert_eq!(format!("{r}"), "11/143");
        assert_eq!(r.percent(), "7.7%");
        assert_eq!(Ratio { count: 0, denom: 0 }.percent(), "0.0%");
        assert_eq!(format_delta(0.038), "+3.8%");
        assert_eq!(format_delta(-0.2), "-20.0%");
        assert_eq!(format_delta(0.0), "0.0%");
    }

    #[test]
    fn fixture_shape() {
        let fs = FailureSet {
            case_ids: vec!["k".into(), "x".into()],
            per_case_fail_fraction: BTreeMap::new(),
            models_considered: vec![],
            threshold: 1.0,
        };
        let verdicts = vec![
            FlawVerdict::flaw("x", "m", "r", FlawCategory::from_minor(MinorCategory::UndefinedModuleName), "t"),
            FlawVerdict::flaw("k", "m", "r", FlawCategory::from_minor(MinorCategory::Kmap), "t"),
            FlawVerdict::flaw("z", "m", "not constant", FlawCategory::from_minor(MinorCategory::Fsm), "t"),
        ];
        let s = compute_flaw_stats("s", 5, &verdicts, &fs);
        assert_eq!(format!("{}", s.flawed_total), "2/5");
        assert_eq!((s.functional, s.syntax, s.diagram), (0, 1, 1));
        assert!(s.is_consistent());
        let empty = compute_flaw_stats("s", 5, &[], &fs);
        assert_eq!(empty.flawed_total.count, 0);
    }
}
