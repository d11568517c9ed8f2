//! Terminal approval of reviewed revisions.

use std::collections::BTreeSet;
use std::fs::{self, OpenOptions};
use std::io::{self, BufRead, Write};
use std::path::Path;

use benchkeeper_core::case::CaseError;
use benchkeeper_core::verdict::{ReviewResult, RevisionProposal};
use benchkeeper_core::{apply_revision, sha256_hex};
use serde::{Deserialize, Serialize};
use similar::TextDiff;

use crate::suite::{self, SuiteError};

/// A proposal together with the outcome of its review.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewedProposal {
    pub proposal: RevisionProposal,
    pub review: ReviewResult,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Accepted,
    Edited,
    Rejected,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub case_id: String,
    pub proposal_hash: String,
    pub decision: Decision,
    #[serde(default)]
    pub reason: Option<String>,
    pub approver: String,
    pub timestamp: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ApprovalSummary {
    pub accepted: usize,
    pub edited: usize,
    pub rejected: usize,
    /// Already decided in an earlier session.
    pub skipped: usize,
    /// Not approved by review, so never shown.
    pub not_reviewed_ok: usize,
    pub quit: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum ApproveError {
    #[error(transparent)]
    Suite(#[from] SuiteError),
    #[error("case `{0}` is not in the suite")]
    UnknownCase(String),
    #[error("case `{case_id}`: {source}")]
    Revision { case_id: String, source: CaseError },
    #[error("{0}")]
    Io(#[from] io::Error),
}

pub fn proposal_hash(p: &RevisionProposal) -> String {
    sha256_hex(&format!("{}\n{}\n{}", p.case_id, p.original_description, p.revised_description))
}

pub fn unified_diff(before: &str, after: &str) -> String {
    TextDiff::from_lines(before, after)
        .unified_diff()
        .context_radius(3)
        .header("description.txt (current)", "description.txt (proposed)")
        .to_string()
}

fn read_decisions(log: &Path) -> Result<Vec<DecisionRecord>, SuiteError> {
    if log.exists() {
        suite::read_jsonl(log)
    } else {
        Ok(Vec::new())
    }
}

fn read_line(input: &mut impl BufRead) -> io::Result<Option<String>> {
    let mut line = String::new();
    Ok((input.read_line(&mut line)? > 0).then(|| line.trim_end_matches(['\n', '\r']).to_string()))
}

/// Walks the review-approved proposals, asking y/n/e/q for each. Accepted
/// and edited texts go through `apply_revision` and are persisted; every
/// decision is appended to `log` so a later session resumes where this one
/// stopped.
pub fn interactive_approve(
    proposals: &[ReviewedProposal],
    suite_root: &Path,
    approver: &str,
    log: &Path,
    mut input: impl BufRead,
    mut output: impl Write,
    clock: &dyn Fn() -> String,
) -> Result<ApprovalSummary, ApproveError> {
    let decided: BTreeSet<String> = read_decisions(log)?.into_iter().map(|d| d.proposal_hash).collect();
    if let Some(parent) = log.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    let manifest = suite::read_manifest(suite_root)?;
    let mut summary = ApprovalSummary::default();
    'proposals: for rp in proposals {
        let p = &rp.proposal;
        let hash = proposal_hash(p);
        if decided.contains(&hash) {
            summary.skipped += 1;
            continue;
        }
        if !rp.review.approved {
            summary.not_reviewed_ok += 1;
            continue;
        }
        writeln!(output, "=== case {} ===\nRationale: {}\n{}", p.case_id, p.rationale.trim_end(), unified_diff(&p.original_description, &p.revised_description))?;
        let (decision, text, reason) = loop {
            write!(output, "Apply this revision? [y]es / [n]o / [e]dit / [q]uit: ")?;
            output.flush()?;
            let Some(answer) = read_line(&mut input)? else {
                summary.quit = true;
                break 'proposals;
            };
            match answer.trim().to_ascii_lowercase().as_str() {
                "y" | "yes" => break (Decision::Accepted, Some(p.revised_description.clone()), None),
                "n" | "no" => {
                    write!(output, "Reason for rejection: ")?;
                    output.flush()?;
                    let reason = read_line(&mut input)?.unwrap_or_default();
                    break (Decision::Rejected, None, Some(reason));
                }
                "e" | "edit" => {
                    writeln!(output, "Enter the description; finish with a line containing only '.'")?;
                    let mut text = String::new();
                    loop {
                        match read_line(&mut input)? {
                            Some(l) if l == "." => break,
                            Some(l) => {
                                text.push_str(&l);
                                text.push('\n');
                            }
                            None => {
                                summary.quit = true;
                                break 'proposals;
                            }
                        }
                    }
                    break (Decision::Edited, Some(text), None);
                }
                "q" | "quit" => {
                    summary.quit = true;
                    break 'proposals;
                }
                _ => writeln!(output, "Please answer y, n, e or q.")?,
            }
        };
        let timestamp = clock();
        if let Some(text) = text {
            let entry = manifest.cases.iter().find(|e| e.case_id == p.case_id).ok_or_else(|| ApproveError::UnknownCase(p.case_id.clone()))?;
            let case = suite::load_case(suite_root, entry)?;
            let revised = apply_revision(&case, &text, approver, &timestamp)
                .map_err(|source| ApproveError::Revision { case_id: p.case_id.clone(), source })?;
            suite::persist_revision(suite_root, &revised)?;
        }
        match decision {
            Decision::Accepted => summary.accepted += 1,
            Decision::Edited => summary.edited += 1,
            Decision::Rejected => summary.rejected += 1,
        }
        let record = DecisionRecord { case_id: p.case_id.clone(), proposal_hash: hash, decision, reason, approver: approver.into(), timestamp };
        let mut f = OpenOptions::new().create(true).append(true).open(log)?;
        writeln!(f, "{}", serde_json::to_string(&record).expect("serializable"))?;
        f.sync_all()?;
    }
    Ok(summary)
}
