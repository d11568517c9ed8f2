//! Benchmark cases and their append-only revision history.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// One approved change to a case description.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RevisionRecord {
    pub timestamp: String,
    pub approver: String,
    pub before_hash: String,
    pub after_hash: String,
    pub before: String,
    pub after: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchmarkCase {
    pub case_id: String,
    /// Directory of the case, relative to the suite root.
    pub dir: String,
    pub description: String,
    pub testbench_source: String,
    pub reference_source: Option<String>,
    /// Raw `vectors.json` for the built-in backend, when present.
    pub vectors_source: Option<String>,
    pub expected_module_name: Option<String>,
    pub tags: Vec<String>,
    pub revision_history: Vec<RevisionRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchmarkSuite {
    pub suite_id: String,
    pub source_label: String,
    pub cases: Vec<BenchmarkCase>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CaseError {
    #[error("case id must not be empty")]
    EmptyCaseId,
    #[error("duplicate case id `{0}`")]
    DuplicateCaseId(String),
    #[error("case `{0}` has an empty description")]
    EmptyDescription(String),
    #[error("case `{0}` has an empty testbench")]
    EmptyTestbench(String),
    #[error("case `{case_id}`: revision {index} does not continue from the previous revision")]
    BrokenHistory { case_id: String, index: usize },
    #[error("revision requires a non-empty approver")]
    UnapprovedRevision,
    #[error("revised description is identical to the current one")]
    NoOpRevision,
}

pub fn sha256_hex(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    let mut out = String::with_capacity(64);
    for b in digest.iter() {
        let _ = write!(out, "{b:02x}");
    }
    out
}

impl BenchmarkCase {
    pub fn validate(&self) -> Result<(), CaseError> {
        if self.case_id.is_empty() {
            return Err(CaseError::EmptyCaseId);
        }
        if self.description.trim().is_empty() {
            return Err(CaseError::EmptyDescription(self.case_id.clone()));
        }
        if self.testbench_source.trim().is_empty() {
            return Err(CaseError::EmptyTestbench(self.case_id.clone()));
        }
        for (i, pair) in self.revision_history.windows(2).enumerate() {
            if pair[1].before != pair[0].after || pair[1].before_hash != pair[0].after_hash {
                return Err(CaseError::BrokenHistory { case_id: self.case_id.clone(), index: i + 1 });
            }
        }
        if let Some(last) = self.revision_history.last() {
            if last.after != self.description {
                return Err(CaseError::BrokenHistory {
                    case_id: self.case_id.clone(),
                    index: self.revision_history.len() - 1,
                });
            }
        }
        Ok(())
    }
}

impl BenchmarkSuite {
    /// Validates every case and sorts cases by id.
    pub fn new(suite_id: String, source_label: String, mut cases: Vec<BenchmarkCase>) -> Result<Self, CaseError> {
        let mut seen = BTreeSet::new();
        for case in &cases {
            if !seen.insert(case.case_id.as_str()) {
                return Err(CaseError::DuplicateCaseId(case.case_id.clone()));
            }
            case.validate()?;
        }
        cases.sort_by(|a, b| a.case_id.cmp(&b.case_id));
        Ok(BenchmarkSuite { suite_id, source_label, cases })
    }

    pub fn case(&self, case_id: &str) -> Option<&BenchmarkCase> {
        self.cases.iter().find(|c| c.case_id == case_id)
    }

    pub fn case_mut(&mut self, case_id: &str) -> Option<&mut BenchmarkCase> {
        self.cases.iter_mut().find(|c| c.case_id == case_id)
    }

    pub fn len(&self) -> usize {
        self.cases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cases.is_empty()
    }
}

/// Returns `case` with its description replaced and the change recorded.
pub fn apply_revision(
    case: &BenchmarkCase,
    new_description: &str,
    approved_by: &str,
    timestamp: &str,
) -> Result<BenchmarkCase, CaseError> {
    if approved_by.trim().is_empty() {
        return Err(CaseError::UnapprovedRevision);
    }
    if new_description == case.description {
        return Err(CaseError::NoOpRevision);
    }
    if new_description.trim().is_empty() {
        return Err(CaseError::EmptyDescription(case.case_id.clone()));
    }
    let mut next = case.clone();
    next.revision_history.push(RevisionRecord {
        timestamp: timestamp.into(),
        approver: approved_by.into(),
        before_hash: sha256_hex(&case.description),
        after_hash: sha256_hex(new_description),
        before: case.description.clone(),
        after: new_description.into(),
    });
    next.description = new_description.into();
    Ok(next)
}
