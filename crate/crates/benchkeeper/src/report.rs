//! CSV and JSON reports.

use std::path::{Path, PathBuf};

use benchkeeper_core::overfit::OverfitMatrix;
use benchkeeper_core::stats::{format_delta, format_percent, AccuracyDelta, FlawStats};
use serde::{Deserialize, Serialize};

use crate::suite::{io_err, write_atomic, SuiteError};

pub const FN_LABEL: &str = "Overfitting (FN)";
pub const FP_LABEL: &str = "Robust/Generalizability (FP)";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub flaw_stats: Vec<FlawStats>,
    pub matrices: Vec<OverfitMatrix>,
    pub deltas: Vec<AccuracyDelta>,
}

fn csv_string(header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

fn opt_percent(v: Option<f64>) -> String {
    v.map(format_percent).unwrap_or_default()
}

pub fn flaw_stats_csv(stats: &[FlawStats]) -> String {
    let header = [
        "suite_id", "constant_fail", "constant_fail_pct", "flawed_total", "flawed_total_pct", "functional", "syntax", "diagram",
    ];
    let rows = stats
        .iter()
        .map(|s| {
            vec![
                s.suite_id.clone(),
                s.constant_fail.to_string(),
                s.constant_fail.percent(),
                s.flawed_total.to_string(),
                s.flawed_total.percent(),
                s.functional.to_string(),
                s.syntax.to_string(),
                s.diagram.to_string(),
            ]
        })
        .collect();
    csv_string(&header, rows)
}

/// Plain-text table: `count/denom (pct%)` per column.
pub fn flaw_stats_table(stats: &[FlawStats]) -> String {
    let mut out = format!("{:<16} {:<18} {:<18} {:>10} {:>6} {:>7}\n", "suite", "constant fail", "flawed total", "functional", "syntax", "diagram");
    for s in stats {
        let cell = |r: benchkeeper_core::stats::Ratio| format!("{r} ({})", r.percent());
        out += &format!(
            "{:<16} {:<18} {:<18} {:>10} {:>6} {:>7}\n",
            s.suite_id,
            cell(s.constant_fail),
            cell(s.flawed_total),
            s.functional,
            s.syntax,
            s.diagram
        );
    }
    out
}

pub fn matrix_csv(matrices: &[OverfitMatrix]) -> String {
    let header = [
        "model_id",
        "TP",
        FN_LABEL,
        FP_LABEL,
        "TN",
        "flag",
        "original_pass_rate",
        "mean_variant_pass_rate",
        "best_variant_pass_rate",
        "worst_variant_pass_rate",
        "overfit_cases",
        "fn_ratio_auxiliary",
    ];
    let rows = matrices
        .iter()
        .map(|m| {
            vec![
                m.model_id.clone(),
                m.tp.to_string(),
                m.fn_overfit.to_string(),
                m.fp_robust.to_string(),
                m.tn.to_string(),
                if m.fn_overfit > 0 { "overfitting".into() } else { String::new() },
                opt_percent(m.original_rate),
                opt_percent(m.mean_variant_rate),
                opt_percent(m.best_variant_rate),
                opt_percent(m.worst_variant_rate),
                m.overfit_cases.join(" "),
                opt_percent(m.aux_overfit_ratio),
            ]
        })
        .collect();
    csv_string(&header, rows)
}

pub fn delta_csv(deltas: &[AccuracyDelta]) -> String {
    let header = ["model_id", "suite_id", "before", "before_pct", "after", "after_pct", "delta"];
    let rows = deltas
        .iter()
        .map(|d| {
            vec![
                d.model_id.clone(),
                d.suite_id.clone(),
                d.before.to_string(),
                d.before.percent(),
                d.after.to_string(),
                d.after.percent(),
                format_delta(d.delta),
            ]
        })
        .collect();
    csv_string(&header, rows)
}

/// Writes `flaw_stats.csv`, `overfit_matrix.csv`, `accuracy_delta.csv` and
/// `report.json` into `dir`; returns the paths written.
pub fn render_reports(report: &Report, dir: &Path) -> Result<Vec<PathBuf>, SuiteError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let files = [
        ("flaw_stats.csv", flaw_stats_csv(&report.flaw_stats)),
        ("flaw_stats.txt", flaw_stats_table(&report.flaw_stats)),
        ("overfit_matrix.csv", matrix_csv(&report.matrices)),
        ("accuracy_delta.csv", delta_csv(&report.deltas)),
        ("report.json", serde_json::to_string_pretty(report).expect("serializable") + "\n"),
    ];
    let mut written = Vec::new();
    for (name, body) in files {
        let p = dir.join(name);
        write_atomic(&p, body.as_bytes()).map_err(io_err(&p))?;
        written.push(p);
    }
    Ok(written)
}

pub fn load_report(path: &Path) -> Result<Report, SuiteError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| SuiteError::MalformedManifest {
        file: path.to_path_buf(),
        line: e.line(),
        col: e.column(),
        msg: e.to_string(),
    })
}
