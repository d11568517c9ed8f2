//! Thought → action → observation transcripts of agent runs.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::reply::{render_action, ActionInvocation, ActionName};
use crate::sim::SimResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Role {
    FailureAnalysis,
    DescriptionRevision,
    DescriptionReview,
    DescriptionUpdate,
    Manager,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::FailureAnalysis => "FAILURE_ANALYSIS",
            Role::DescriptionRevision => "DESCRIPTION_REVISION",
            Role::DescriptionReview => "DESCRIPTION_REVIEW",
            Role::DescriptionUpdate => "DESCRIPTION_UPDATE",
            Role::Manager => "MANAGER",
        }
    }

    pub fn allowed_actions(self) -> &'static [ActionName] {
        use ActionName::*;
        match self {
            Role::FailureAnalysis => &[CompareCodes, CheckInstruction, Reason, ViewFile, SearchFiles, LocateCase, Evaluation],
            Role::DescriptionRevision => &[CheckInstruction, ViewFile, Revise, Reason, Evaluation, SearchFiles],
            Role::DescriptionReview => &[CheckInstruction, ViewFile, CompareCodes, Reason],
            Role::DescriptionUpdate => &[CheckInstruction, ViewFile, Reason, Revise],
            Role::Manager => &[LocateCase, SearchFiles, Evaluation],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Terminal {
    Completed,
    MaxIters,
    ProviderError,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileView {
    pub path: String,
    pub contents: String,
}

/// What the environment (or a reasoning call) returned for one action.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Observation {
    Text { text: String },
    Files { files: Vec<FileView> },
    Simulation { result: SimResult, artifacts: BTreeMap<String, String> },
    Reasoning { payload: String },
    Edited { path: String },
    Matches { paths: Vec<String> },
    Case { case_id: String, files: Vec<String> },
    /// The action was refused before dispatch; the run continues.
    Rejected { reason: String },
    /// A sub-call of a composite action failed.
    Failed { message: String },
    Final { payload: String },
    Halted { reason: String },
}

impl Observation {
    pub fn text(text: impl Into<String>) -> Self {
        Observation::Text { text: text.into() }
    }

    /// Plain-text rendering used inside prompts.
    pub fn render(&self) -> String {
        let mut out = String::new();
        match self {
            Observation::Text { text } => out.push_str(text),
            Observation::Files { files } => {
                for f in files {
                    let _ = write!(out, "=== view_file({}) ===\n{}\n", f.path, f.contents.trim_end());
                }
            }
            Observation::Simulation { result, artifacts } => {
                let _ = writeln!(
                    out,
                    "SIMULATION syntax_pass={} functional_pass={} failed_vectors={:?}",
                    result.syntax_pass, result.functional_pass, result.failed_vector_indices
                );
                for (name, body) in artifacts {
                    let _ = write!(out, "=== {name} ===\n{}\n", body.trim_end());
                }
            }
            Observation::Reasoning { payload } => {
                let _ = write!(out, "REASONING RESULT:\n{payload}");
            }
            Observation::Edited { path } => {
                let _ = write!(out, "edit_file({path}) succeeded");
            }
            Observation::Matches { paths } => {
                let _ = write!(out, "search_files matched: {}", paths.join(", "));
            }
            Observation::Case { case_id, files } => {
                let _ = write!(out, "case {case_id}: {}", files.join(", "));
            }
            Observation::Rejected { reason } => {
                let _ = write!(out, "ACTION REJECTED: {reason}");
            }
            Observation::Failed { message } => {
                let _ = write!(out, "ACTION FAILED: {message}");
            }
            Observation::Final { payload } => {
                let _ = write!(out, "FINAL: {payload}");
            }
            Observation::Halted { reason } => {
                let _ = write!(out, "HALTED: {reason}");
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum StepAction {
    Invoke { invocation: ActionInvocation },
    /// Unknown action, action outside the allowed set, or bad arguments.
    Rejected { name: String, args: BTreeMap<String, String>, reason: String },
    /// The provider emitted the terminal marker.
    Final,
    /// The environment stopped the run without executing the action.
    Halted { name: String },
}

impl StepAction {
    pub fn invoked(&self) -> Option<&ActionInvocation> {
        match self {
            StepAction::Invoke { invocation } => Some(invocation),
            _ => None,
        }
    }

    pub fn render(&self) -> String {
        match self {
            StepAction::Invoke { invocation } => invocation.render(),
            StepAction::Rejected { name, args, .. } => render_action(name, args),
            StepAction::Final => "FINAL".into(),
            StepAction::Halted { name } => format!("{name} (not executed)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentStep {
    pub index: usize,
    pub thought: String,
    pub action: StepAction,
    pub observation: Observation,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TranscriptError {
    #[error("transcript already has a terminal state")]
    AlreadyTerminal,
    #[error("step index {got} does not follow {expected}")]
    BadIndex { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentTranscript {
    pub role: Role,
    pub initial_observation: Observation,
    pub steps: Vec<AgentStep>,
    pub terminal: Option<Terminal>,
    pub error: Option<String>,
}

impl AgentTranscript {
    pub fn new(role: Role, initial_observation: Observation) -> Self {
        AgentTranscript { role, initial_observation, steps: Vec::new(), terminal: None, error: None }
    }

    pub fn next_index(&self) -> usize {
        self.steps.len() + 1
    }

    pub fn push(&mut self, step: AgentStep) -> Result<(), TranscriptError> {
        if self.terminal.is_some() {
            return Err(TranscriptError::AlreadyTerminal);
        }
        if step.index != self.next_index() {
            return Err(TranscriptError::BadIndex { expected: self.next_index(), got: step.index });
        }
        self.steps.push(step);
        Ok(())
    }

    pub fn finish(&mut self, terminal: Terminal, error: Option<String>) -> Result<(), TranscriptError> {
        if self.terminal.is_some() {
            return Err(TranscriptError::AlreadyTerminal);
        }
        self.terminal = Some(terminal);
        self.error = error;
        Ok(())
    }

    /// O_{i-1} for the next step.
    pub fn last_observation(&self) -> &Observation {
        self.steps.last().map_or(&self.initial_observation, |s| &s.observation)
    }

    /// Names of the actions that were actually dispatched, in order.
    pub fn action_names(&self) -> Vec<ActionName> {
        self.steps.iter().filter_map(|s| s.action.invoked().map(|a| a.name)).collect()
    }

    pub fn final_payload(&self) -> Option<&str> {
        match self.steps.last().map(|s| &s.observation) {
            Some(Observation::Final { payload } | Observation::Reasoning { payload }) if self.terminal == Some(Terminal::Completed) => {
                Some(payload)
            }
            _ => None,
        }
    }

    /// Checks contiguous 1-based indices.
    pub fn is_well_formed(&self) -> bool {
        self.steps.iter().enumerate().all(|(i, s)| s.index == i + 1)
    }
}
