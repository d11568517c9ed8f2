//! Benchmark maintenance for LLM RTL generation: suite IO, model
//! providers, the agent loop and its environments, simulation backends,
//! evaluation, failure analysis, revision review, style rewrites, reports
//! and the `benchkeeper` command line.

pub mod actions;
pub mod approve;
pub mod agent;
pub mod backend;
pub mod cli;
pub mod config;
pub mod eval;
pub mod flaw;
pub mod pipeline;
pub mod provider;
pub mod report;
pub mod rewrite;
pub mod run;
pub mod suite;
pub mod workspace;
