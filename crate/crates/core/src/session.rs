//! EDA session lifecycle: NEW → UPLOADED → COMPILED → SIMULATED → CLOSED.

use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SessionState {
    New,
    Uploaded,
    Compiled,
    Simulated,
    Closed,
}

impl SessionState {
    pub const ORDER: [SessionState; 5] =
        [SessionState::New, SessionState::Uploaded, SessionState::Compiled, SessionState::Simulated, SessionState::Closed];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionOp {
    Upload,
    Compile,
    Simulate,
    /// Reads results; requires SIMULATED and leaves the state unchanged.
    Download,
    Close,
}

impl fmt::Display for SessionOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SessionOp::Upload => "upload",
            SessionOp::Compile => "compile",
            SessionOp::Simulate => "simulate",
            SessionOp::Download => "download",
            SessionOp::Close => "close",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("{op} is not allowed in state {state:?}")]
pub struct StateOrderViolation {
    pub state: SessionState,
    pub op: SessionOp,
}

/// The state required before `op` and the state after it.
pub fn requirement(op: SessionOp) -> (SessionState, SessionState) {
    match op {
        SessionOp::Upload => (SessionState::New, SessionState::Uploaded),
        SessionOp::Compile => (SessionState::Uploaded, SessionState::Compiled),
        SessionOp::Simulate => (SessionState::Compiled, SessionState::Simulated),
        SessionOp::Download => (SessionState::Simulated, SessionState::Simulated),
        SessionOp::Close => (SessionState::Simulated, SessionState::Closed),
    }
}

pub fn transition(state: SessionState, op: SessionOp) -> Result<SessionState, StateOrderViolation> {
    let (from, to) = requirement(op);
    if state == from {
        Ok(to)
    } else {
        Err(StateOrderViolation { state, op })
    }
}

/// Current state plus the sequence of distinct states visited.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionTracker {
    state: SessionState,
    history: Vec<SessionState>,
}

impl Default for SessionTracker {
    fn default() -> Self {
        SessionTracker { state: SessionState::New, history: alloc::vec![SessionState::New] }
    }
}

impl SessionTracker {
    pub fn state(&self) -> SessionState {
        self.state
    }

    pub fn history(&self) -> &[SessionState] {
        &self.history
    }

    /// Checks `op` without applying it.
    pub fn check(&self, op: SessionOp) -> Result<SessionState, StateOrderViolation> {
        transition(self.state, op)
    }

    /// Applies a transition whose underlying work succeeded.
    pub fn commit(&mut self, op: SessionOp) -> Result<SessionState, StateOrderViolation> {
        let next = transition(self.state, op)?;
        if next != self.state {
            self.history.push(next);
        }
        self.state = next;
        Ok(next)
    }

    /// Whether the visited states form a prefix of the canonical order.
    pub fn is_monotone(&self) -> bool {
        self.history.len() <= SessionState::ORDER.len() && self.history.iter().zip(SessionState::ORDER).all(|(a, b)| *a == b)
    }
}
