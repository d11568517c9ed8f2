//! The `benchkeeper` command line.

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use benchkeeper_core::outcome::{aggregate_consistent_failures, FailureSet};
use benchkeeper_core::overfit::{build_matrices, cells_from_outcomes};
use benchkeeper_core::stats::{compute_accuracy_delta, compute_flaw_stats};
use benchkeeper_core::{BenchmarkSuite, EvalOutcome, FlawVerdict, RevisionProposal};
use clap::{Args, Parser, Subcommand};

use crate::approve::{interactive_approve, ReviewedProposal};
use crate::backend::BackendConfig;
use crate::config::Config;
use crate::eval::evaluate;
use crate::flaw::AgentOptions;
use crate::pipeline;
use crate::report::{render_reports, Report};
use crate::rewrite::resolve_styles;
use crate::run::create_run_dir;
use crate::suite::{self, read_jsonl, write_atomic, write_jsonl_file};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_PIPELINE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "benchkeeper", version, about = "Maintain RTL generation benchmarks: find flawed cases, revise them and detect overfitting")]
pub struct Cli {
    /// Configuration file (providers, roles, backend, thresholds).
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Backend configuration file; overrides the one in --config.
    #[arg(long, global = true, value_name = "FILE")]
    pub backend: Option<PathBuf>,
    /// Write outputs here instead of a new runs/<timestamp>/ directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub run_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct SuiteArg {
    /// Suite root containing manifest.json.
    #[arg(long, value_name = "DIR")]
    pub suite: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate and simulate RTL for every case with every generator model.
    Evaluate {
        #[command(flatten)]
        suite: SuiteArg,
    },
    /// Analyze consistently failing cases for description flaws.
    Analyze {
        #[command(flatten)]
        suite: SuiteArg,
        #[arg(long, value_name = "FILE")]
        outcomes: PathBuf,
    },
    /// Propose revised descriptions for flawed cases.
    Revise {
        #[command(flatten)]
        suite: SuiteArg,
        #[arg(long, value_name = "FILE")]
        verdicts: PathBuf,
    },
    /// Review proposals for leakage and preserved semantics.
    Review {
        #[command(flatten)]
        suite: SuiteArg,
        #[arg(long, value_name = "FILE")]
        proposals: PathBuf,
    },
    /// Interactively accept, edit or reject reviewed proposals.
    Approve {
        #[command(flatten)]
        suite: SuiteArg,
        #[arg(long, value_name = "FILE")]
        reviews: PathBuf,
        /// Decision log; defaults to decisions.jsonl beside the reviews file.
        #[arg(long, value_name = "FILE")]
        log: Option<PathBuf>,
        #[arg(long)]
        approver: Option<String>,
    },
    /// Produce style variants of every description.
    Rewrite {
        #[command(flatten)]
        suite: SuiteArg,
        /// Number of variants per case.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Evaluate originals and variants and classify each pair.
    DetectOverfit {
        #[command(flatten)]
        suite: SuiteArg,
        /// Reuse outcomes instead of evaluating again.
        #[arg(long, value_name = "FILE")]
        outcomes: Option<PathBuf>,
    },
    /// Render flaw statistics, overfitting matrices and accuracy deltas.
    Report {
        #[command(flatten)]
        suite: SuiteArg,
        /// Outcomes the failure set is computed from.
        #[arg(long, value_name = "FILE")]
        outcomes: Option<PathBuf>,
        /// Verdicts for flaw statistics.
        #[arg(long, value_name = "FILE", requires = "outcomes")]
        verdicts: Option<PathBuf>,
        /// Outcomes before revision.
        #[arg(long, value_name = "FILE", requires = "after")]
        before: Option<PathBuf>,
        /// Outcomes after revision.
        #[arg(long, value_name = "FILE", requires = "before")]
        after: Option<PathBuf>,
        /// Outcomes that include variant evaluations.
        #[arg(long, value_name = "FILE")]
        overfit: Option<PathBuf>,
    },
}

type Failure = Box<dyn std::error::Error>;

struct Ctx {
    config: Config,
    backend: BackendConfig,
    run_dir: PathBuf,
}

impl Ctx {
    fn opts(&self) -> AgentOptions {
        AgentOptions { max_iters: self.config.thresholds.max_iters, leakage_n: self.config.thresholds.leakage_n, backend: self.backend.clone() }
    }

    fn failure_set(&self, outcomes: &[EvalOutcome]) -> Result<FailureSet, Failure> {
        let gens = &self.config.roles.generators;
        let models = (!gens.is_empty()).then_some(gens.as_slice());
        Ok(aggregate_consistent_failures(outcomes, models, self.config.thresholds.failure_threshold)?)
    }
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let body = serde_json::to_string_pretty(value)? + "\n";
    write_atomic(path, body.as_bytes()).map_err(suite::io_err(path))?;
    Ok(())
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run(args: Vec<String>, input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    match execute(cli, input, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_PIPELINE
        }
    }
}

fn execute(cli: Cli, input: &mut dyn BufRead, out: &mut dyn Write) -> Result<(), Failure> {
    let config = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let backend = match &cli.backend {
        Some(p) => BackendConfig::load(p)?,
        None => config.backend(),
    };
    let suite_root = match &cli.command {
        Command::Evaluate { suite }
        | Command::Analyze { suite, .. }
        | Command::Revise { suite, .. }
        | Command::Review { suite, .. }
        | Command::Approve { suite, .. }
        | Command::Rewrite { suite, .. }
        | Command::DetectOverfit { suite, .. }
        | Command::Report { suite, .. } => suite.suite.clone(),
    };
    let suite = suite::load_suite(&suite_root)?;
    let run_dir = match cli.run_dir {
        Some(d) => {
            std::fs::create_dir_all(&d).map_err(suite::io_err(&d))?;
            d
        }
        None => {
            let runs = config.runs_dir.as_deref().map(|r| config.resolve(r)).unwrap_or_else(|| PathBuf::from("runs"));
            create_run_dir(&runs).map_err(suite::io_err(&runs))?
        }
    };
    let ctx = Ctx { config, backend, run_dir };
    let t = &ctx.config.thresholds;
    let dir = &ctx.run_dir;
    match cli.command {
        Command::Evaluate { .. } => {
            let mut outcomes = Vec::new();
            for model in ctx.config.generators()? {
                outcomes.extend(evaluate(model.as_ref(), &suite, &ctx.backend, t.attempts, t.workers)?);
            }
            write_jsonl_file(&dir.join("outcomes.jsonl"), &outcomes)?;
            let failures = ctx.failure_set(&outcomes)?;
            write_json(&dir.join("failure_set.json"), &failures)?;
            writeln!(out, "{} outcomes, {} consistently failing cases", outcomes.len(), failures.case_ids.len())?;
        }
        Command::Analyze { outcomes, .. } => {
            let outcomes: Vec<EvalOutcome> = read_jsonl(&outcomes)?;
            let failures = ctx.failure_set(&outcomes)?;
            write_json(&dir.join("failure_set.json"), &failures)?;
            let analyst = ctx.config.role_provider("analysis")?;
            let stage = pipeline::analyze_all(&suite, &outcomes, &failures, analyst.as_ref(), &ctx.opts())?;
            stage.save(dir, "verdicts")?;
            let flawed = stage.items.iter().filter(|v| v.is_flaw).count();
            writeln!(out, "{} verdicts, {flawed} flawed", stage.items.len())?;
        }
        Command::Revise { verdicts, .. } => {
            let verdicts: Vec<FlawVerdict> = read_jsonl(&verdicts)?;
            let reviser = ctx.config.role_provider("revision")?;
            let stage = pipeline::revise_all(&suite, &verdicts, reviser.as_ref(), &ctx.opts())?;
            stage.save(dir, "proposals")?;
            writeln!(out, "{} proposals", stage.items.len())?;
        }
        Command::Review { proposals, .. } => {
            let proposals: Vec<RevisionProposal> = read_jsonl(&proposals)?;
            let reviewer = ctx.config.role_provider("review")?;
            let stage = pipeline::review_all(&suite, &proposals, reviewer.as_ref(), &ctx.opts())?;
            stage.save(dir, "reviews")?;
            let approved = stage.items.iter().filter(|r| r.review.approved).count();
            writeln!(out, "{} reviewed, {approved} approved", stage.items.len())?;
        }
        Command::Approve { reviews, log, approver, .. } => {
            let items: Vec<ReviewedProposal> = read_jsonl(&reviews)?;
            let approver = approver
                .or_else(|| ctx.config.approver.clone())
                .or_else(|| std::env::var("USER").ok())
                .filter(|a| !a.trim().is_empty())
                .ok_or("no approver given; pass --approver or set `approver` in the config")?;
            let log = log.unwrap_or_else(|| reviews.with_file_name("decisions.jsonl"));
            let clock = || chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
            let s = interactive_approve(&items, &suite_root, &approver, &log, input, &mut *out, &clock)?;
            writeln!(
                out,
                "accepted {}, edited {}, rejected {}, already decided {}, not approved by review {}{}",
                s.accepted,
                s.edited,
                s.rejected,
                s.skipped,
                s.not_reviewed_ok,
                if s.quit { " (stopped early)" } else { "" }
            )?;
        }
        Command::Rewrite { k, .. } => {
            let styles = resolve_styles(ctx.config.styles.as_ref())?;
            let updater = ctx.config.role_provider("update")?;
            let reviewer = ctx.config.role_provider("review")?;
            let k = k.unwrap_or(t.variants_k);
            let stage = pipeline::rewrite_all(&suite, &suite_root, &styles, k, updater.as_ref(), reviewer.as_ref(), &ctx.opts())?;
            stage.save(dir, "variants")?;
            writeln!(out, "{} variants kept, {} dropped", stage.items.len(), stage.log.len())?;
        }
        Command::DetectOverfit { outcomes, .. } => {
            let outcomes: Vec<EvalOutcome> = match outcomes {
                Some(p) => read_jsonl(&p)?,
                None => {
                    let models = ctx.config.generators()?;
                    pipeline::evaluate_with_variants(&models, &suite, &suite_root, &ctx.backend, t.attempts, t.workers)?
                }
            };
            write_jsonl_file(&dir.join("overfit_outcomes.jsonl"), &outcomes)?;
            let matrices = build_matrices(&cells_from_outcomes(&outcomes));
            write_json(&dir.join("overfit_matrix.json"), &matrices)?;
            for m in &matrices {
                writeln!(out, "{}: TP {} FN {} FP {} TN {}", m.model_id, m.tp, m.fn_overfit, m.fp_robust, m.tn)?;
            }
        }
        Command::Report { outcomes, verdicts, before, after, overfit, .. } => {
            let report = build_report(&ctx, &suite, outcomes, verdicts, before.zip(after), overfit)?;
            for p in render_reports(&report, dir)? {
                writeln!(out, "{}", p.display())?;
            }
        }
    }
    writeln!(out, "run directory: {}", dir.display())?;
    Ok(())
}

fn build_report(
    ctx: &Ctx,
    suite: &BenchmarkSuite,
    outcomes: Option<PathBuf>,
    verdicts: Option<PathBuf>,
    delta: Option<(PathBuf, PathBuf)>,
    overfit: Option<PathBuf>,
) -> Result<Report, Failure> {
    let mut report = Report::default();
    if let Some(o) = outcomes {
        let outcomes: Vec<EvalOutcome> = read_jsonl(&o)?;
        let verdicts: Vec<FlawVerdict> = match verdicts {
            Some(v) => read_jsonl(&v)?,
            None => Vec::new(),
        };
        let failures = ctx.failure_set(&outcomes)?;
        report.flaw_stats.push(compute_flaw_stats(&suite.suite_id, suite.len(), &verdicts, &failures));
    }
    if let Some((b, a)) = delta {
        let before: Vec<EvalOutcome> = read_jsonl(&b)?;
        let after: Vec<EvalOutcome> = read_jsonl(&a)?;
        report.deltas = compute_accuracy_delta(&suite.suite_id, &before, &after);
    }
    if let Some(o) = overfit {
        let outcomes: Vec<EvalOutcome> = read_jsonl(&o)?;
        report.matrices = build_matrices(&cells_from_outcomes(&outcomes));
    }
    Ok(report)
}
