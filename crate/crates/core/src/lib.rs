//! Pure building blocks for maintaining LLM RTL-generation benchmarks.
//!
//! Everything in this crate is allocation-only (`alloc`, no `std`): the
//! combinational mini-HDL parser and evaluator, the verbatim-leakage detector,
//! the agent reply grammar and transcript model, the EDA session state
//! machine, flaw taxonomy, overfitting classification and report statistics.
//! File formats, providers, subprocesses and the CLI live in the `benchkeeper`
//! crate.

#![no_std]

extern crate alloc;

pub mod case;
pub mod hdl;
pub mod leakage;
pub mod outcome;
pub mod overfit;
pub mod reply;
pub mod session;
pub mod sim;
pub mod stats;
pub mod style;
pub mod taxonomy;
pub mod transcript;
pub mod verdict;








pub use case::{apply_revision, sha256_hex, BenchmarkCase, BenchmarkSuite, CaseError, RevisionRecord};
pub use outcome::{EvalOutcome, FailureSet, ORIGINAL_VARIANT};
pub use overfit::{OverfitCell, OverfitClass, OverfitMatrix};
pub use reply::{ActionInvocation, ActionName, Reply};
pub use session::{SessionOp, SessionState, StateOrderViolation};
pub use sim::SimResult;
pub use taxonomy::{FlawCategory, MajorCategory, MinorCategory};
pub use transcript::{AgentStep, AgentTranscript, Observation, Role, StepAction, Terminal};
pub use verdict::{FlawVerdict, ReviewResult, RevisionProposal};
