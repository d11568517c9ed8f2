//! Failure-analysis verdicts, revision proposals and review results, plus
//! parsers for the payloads agents return.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::leakage::{tokenize, Span};
use crate::taxonomy::{FlawCategory, TaxonomyError};

/// Marker the analysis agent writes when it judges the generated code correct.
pub const CODE_CORRECT_MARKER: &str = "CODE_CORRECT:";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum VerdictStatus {
    Decided,
    /// No reference code could be found; left for human triage.
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlawVerdict {
    pub case_id: String,
    pub model_id: String,
    pub is_flaw: bool,
    pub reason: String,
    pub category: FlawCategory,
    pub code_judged_correct: bool,
    pub transcript_ref: String,
    pub status: VerdictStatus,
}

impl FlawVerdict {
    pub fn flaw(case_id: &str, model_id: &str, reason: &str, category: FlawCategory, transcript_ref: &str) -> Self {
        FlawVerdict {
            case_id: case_id.into(),
            model_id: model_id.into(),
            is_flaw: true,
            reason: reason.into(),
            category,
            code_judged_correct: true,
            transcript_ref: transcript_ref.into(),
            status: VerdictStatus::Decided,
        }
    }

    pub fn no_flaw(case_id: &str, model_id: &str, reason: &str, code_judged_correct: bool, transcript_ref: &str) -> Self {
        FlawVerdict {
            case_id: case_id.into(),
            model_id: model_id.into(),
            is_flaw: false,
            reason: reason.into(),
            category: FlawCategory::unclassified(),
            code_judged_correct,
            transcript_ref: transcript_ref.into(),
            status: VerdictStatus::Decided,
        }
    }

    pub fn unknown(case_id: &str, model_id: &str, reason: &str) -> Self {
        FlawVerdict { status: VerdictStatus::Unknown, ..Self::no_flaw(case_id, model_id, reason, false, "") }
    }

    pub fn is_consistent(&self) -> bool {
        (!self.is_flaw || self.code_judged_correct)
            && (self.is_flaw || self.category == FlawCategory::unclassified())
            && (self.status == VerdictStatus::Decided || !self.is_flaw)
    }
}

/// Reads the code-correctness judgment from an agent thought.
///
/// Only an explicit `CODE_CORRECT: YES` with no conflicting `NO` counts as
/// correct; anything else is treated as a model defect.
pub fn parse_judgment(thought: &str) -> bool {
    let mut yes = false;
    let mut no = false;
    for line in thought.lines() {
        let line = line.trim();
        let Some(head) = line.get(..CODE_CORRECT_MARKER.len()) else { continue };
        if !head.eq_ignore_ascii_case(CODE_CORRECT_MARKER) {
            continue;
        }
        let value = line[CODE_CORRECT_MARKER.len()..].trim();
        let word = value.split(|c: char| !c.is_ascii_alphabetic()).next().unwrap_or("");
        if word.eq_ignore_ascii_case("yes") {
            yes = true;
        } else {
            no = true;
        }
    }
    yes && !no
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PayloadError {
    #[error("payload has no IS_FLAW line")]
    MissingIsFlaw,
    #[error("IS_FLAW must be YES or NO, got `{0}`")]
    BadIsFlaw(String),
    #[error("payload has no CATEGORY line")]
    MissingCategory,
    #[error(transparent)]
    Category(#[from] TaxonomyError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlawJudgment {
    pub is_flaw: bool,
    pub category: Option<FlawCategory>,
    pub reason: String,
}

/// Parses a REASON payload of the form
///
/// ```text
/// IS_FLAW: YES
/// CATEGORY: SYNTAX/UNDEFINED_MODULE_NAME
/// REASON: free text, possibly over several lines
/// ```
///
/// CATEGORY is required only when IS_FLAW is YES.
pub fn parse_flaw_payload(payload: &str) -> Result<FlawJudgment, PayloadError> {
    let mut is_flaw = None;
    let mut category = None;
    let mut reason: Option<String> = None;
    for line in payload.lines() {
        let trimmed = line.trim();
        if let Some(v) = field(trimmed, "IS_FLAW") {
            is_flaw = Some(match v.to_ascii_uppercase().as_str() {
                "YES" | "TRUE" => true,
                "NO" | "FALSE" => false,
                _ => return Err(PayloadError::BadIsFlaw(v.into())),
            });
        } else if let Some(v) = field(trimmed, "CATEGORY") {
            category = Some(v.parse::<FlawCategory>()?);
        } else if let Some(v) = field(trimmed, "REASON") {
            reason = Some(v.into());
        } else if let Some(r) = reason.as_mut() {
            r.push('\n');
            r.push_str(line);
        }
    }
    let is_flaw = is_flaw.ok_or(PayloadError::MissingIsFlaw)?;
    if is_flaw && category.is_none() {
        return Err(PayloadError::MissingCategory);
    }
    Ok(FlawJudgment { is_flaw, category, reason: reason.map(|r| r.trim_end().to_string()).unwrap_or_default() })
}

fn field<'a>(line: &'a str, key: &str) -> Option<&'a str> {
    let (k, v) = line.split_once(':')?;
    k.trim().eq_ignore_ascii_case(key).then(|| v.trim())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RevisionProposal {
    pub case_id: String,
    pub original_description: String,
    pub revised_description: String,
    pub rationale: String,
    pub transcript_ref: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProposalError {
    #[error("revised description is identical to the original")]
    Unchanged,
    #[error("revised description is empty")]
    Empty,
    #[error("rationale is empty")]
    NoRationale,
}

impl RevisionProposal {
    pub fn validate(&self) -> Result<(), ProposalError> {
        if self.revised_description.trim().is_empty() {
            return Err(ProposalError::Empty);
        }
        if self.revised_description == self.original_description {
            return Err(ProposalError::Unchanged);
        }
        if self.rationale.trim().is_empty() {
            return Err(ProposalError::NoRationale);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewResult {
    pub approved: bool,
    pub rule1_semantics_ok: bool,
    pub rule2_no_leakage: bool,
    pub reviewer_notes: String,
    pub leakage_spans: Vec<Span>,
}

impl ReviewResult {
    /// Rule 2 holds exactly when no leakage span was found.
    pub fn new(rule1_semantics_ok: bool, leakage_spans: Vec<Span>, reviewer_notes: impl Into<String>) -> Self {
        let rule2_no_leakage = leakage_spans.is_empty();
        ReviewResult {
            approved: rule1_semantics_ok && rule2_no_leakage,
            rule1_semantics_ok,
            rule2_no_leakage,
            reviewer_notes: reviewer_notes.into(),
            leakage_spans,
        }
    }

    pub fn is_consistent(&self) -> bool {
        self.approved == (self.rule1_semantics_ok && self.rule2_no_leakage)
            && self.leakage_spans.is_empty() == self.rule2_no_leakage
    }
}

/// Parses a reviewer payload: `APPROVE` or `REJECT: notes`. Anything else
/// rejects.
pub fn parse_review_payload(payload: &str) -> (bool, String) {
    let text = payload.trim();
    let upper = text.to_ascii_uppercase();
    if upper == "APPROVE" || upper == "APPROVED" {
        return (true, String::new());
    }
    if upper.starts_with("REJECT") {
        let notes = text[6..].trim_start_matches(|c: char| c == ':' || c.is_whitespace()).trim();
        return (false, notes.into());
    }
    (false, alloc::format!("ambiguous review verdict: {text}"))
}

/// Protected identifiers the original description mentions.
///
/// `protected` holds names that must survive a rewrite, such as module and
/// port names of the reference design.
pub fn protected_vocabulary(original: &str, protected: &BTreeSet<String>) -> BTreeSet<String> {
    identifiers(original).into_iter().filter(|id| protected.contains(id)).collect()
}

/// Identifiers of `vocabulary` that no longer appear in `revised`.
pub fn missing_identifiers(vocabulary: &BTreeSet<String>, revised: &str) -> Vec<String> {
    let present = identifiers(revised);
    vocabulary.iter().filter(|id| !present.contains(*id)).cloned().collect()
}

pub fn identifiers(text: &str) -> BTreeSet<String> {
    tokenize(text)
        .into_iter()
        .filter(|t| t.text.starts_with(|c: char| c.is_ascii_alphabetic() || c == '_'))
        .map(|t| t.text.to_string())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxonomy::MinorCategory;
    use alloc::vec;

    #[test]
    fn judgment_is_conservative() {
        assert!(parse_judgment("looks fine\nCODE_CORRECT: YES"));
        assert!(parse_judgment("code_correct: yes, matches"));
        assert!(!parse_judgment("CODE_CORRECT: NO"));
        assert!(!parse_judgment("CODE_CORRECT: maybe"));
        assert!(!parse_judgment("Code is correct"));
        assert!(!parse_judgment("CODE_CORRECT: YES\nCODE_CORRECT: NO"));
    }

    #[test]
    fn flaw_payload() {
        let j = parse_flaw_payload("IS_FLAW: YES\nCATEGORY: KMAP\nREASON: x[4:1] vs\nx[3:0]").unwrap();
        assert!(j.is_flaw);
        assert_eq!(j.category.unwrap().minor(), MinorCategory::Kmap);
        assert_eq!(j.reason, "x[4:1] vs\nx[3:0]");
        assert_eq!(parse_flaw_payload("REASON: r"), Err(PayloadError::MissingIsFlaw));
        assert_eq!(parse_flaw_payload("IS_FLAW: YES"), Err(PayloadError::MissingCategory));
        assert!(!parse_flaw_payload("IS_FLAW: NO").unwrap().is_flaw);
    }

    #[test]
    fn review_rules() {
        let r = ReviewResult::new(true, vec![], "");
        assert!(r.approved && r.is_consistent());
        let r = ReviewResult::new(true, vec![Span { start: 0, len: 3 }], "");
        assert!(!r.approved && !r.rule2_no_leakage && r.is_consistent());
        assert_eq!(parse_review_payload("REJECT: renamed y"), (false, "renamed y".into()));
        assert!(parse_review_payload(" approve ").0);
        assert!(!parse_review_payload("looks ok I guess").0);
    }

    #[test]
    fn identifier_guard() {
        let protected: BTreeSet<String> = ["TopModule", "a", "y"].iter().map(|s| s.to_string()).collect();
        let vocab = protected_vocabulary("Build TopModule with input a and output y.", &protected);
        assert_eq!(vocab.len(), 3);
        assert!(missing_identifiers(&vocab, "Build TopModule: y = not a").is_empty());
        assert_eq!(missing_identifiers(&vocab, "Build Top with a and y"), vec!["TopModule".to_string()]);
    }

    #[test]
    fn verdict_consistency() {
        let v = FlawVerdict::no_flaw("c", "m", "model defect", false, "t");
        assert!(v.is_consistent());
        let mut bad = v.clone();
        bad.is_flaw = true;
        assert!(!bad.is_consistent());
    }
}
