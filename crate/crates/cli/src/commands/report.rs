use std::path::{Path, PathBuf};

use lancer_core::metrics::{read_history_csv, tradeoff_curve, write_curve_csv};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult, Context, ErrorKind};
use crate::files::{self, HISTORY_FILE, SUMMARY_FILE};

use super::train::Summary;

pub const REPORT_FORMAT: &str = "lancer-report";
pub const CURVE_FILE: &str = "curve.csv";
pub const REPORT_FILE: &str = "report.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportInput {
    pub run: String,
    pub method: String,
    pub config_hash: String,
    pub seed: u64,
    pub summary_sha256: String,
    pub history_sha256: String,
    pub solver_calls: u64,
    pub final_mean_decision_loss: Option<f64>,
    pub final_objective: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub format: String,
    pub version: u32,
    pub inputs: Vec<ReportInput>,
}

/// Merges the histories of several run directories into one solver-call
/// trade-off curve and an index of the inputs.
pub fn run(runs: &[PathBuf], out_dir: &Path) -> CliResult<(PathBuf, Report)> {
    if runs.is_empty() {
        return Err(CliError::config("report needs at least one run directory"));
    }
    let mut inputs = Vec::with_capacity(runs.len());
    let mut histories = Vec::with_capacity(runs.len());
    for dir in runs {
        let sbytes = files::read(&dir.join(SUMMARY_FILE))?;
        let summary: Summary = serde_json::from_slice(&sbytes)
            .map_err(|e| CliError::new(ErrorKind::Data, e).context(format!("parsing {}", dir.join(SUMMARY_FILE).display())))?;
        let hbytes = files::read(&dir.join(HISTORY_FILE))?;
        let rows = read_history_csv(hbytes.as_slice())
            .map_err(|e| CliError::new(ErrorKind::Data, e).context(format!("parsing {}", dir.join(HISTORY_FILE).display())))?;
        inputs.push(ReportInput {
            run: dir.display().to_string(),
            method: summary.mode.name().to_string(),
            config_hash: summary.config_hash.clone(),
            seed: summary.seed,
            summary_sha256: files::sha256_hex(&sbytes),
            history_sha256: files::sha256_hex(&hbytes),
            solver_calls: summary.solver_calls,
            final_mean_decision_loss: summary.final_mean_decision_loss,
            final_objective: summary.final_objective,
        });
        histories.push(rows);
    }
    let named: Vec<(&str, &[lancer_core::lancer::HistoryRow])> =
        inputs.iter().zip(&histories).map(|(i, h)| (i.method.as_str(), h.as_slice())).collect();
    let points = tradeoff_curve(&named);
    let comment = inputs
        .iter()
        .map(|i| format!("run={} config_hash={} seed={}", i.run, i.config_hash, i.seed))
        .collect::<Vec<_>>()
        .join("\n");
    let mut csv = Vec::new();
    write_curve_csv(&points, &mut csv, Some(&comment))?;
    let curve_path = out_dir.join(CURVE_FILE);
    files::write_atomic(&curve_path, &csv).ctx("writing curve")?;
    let report = Report {
        format: REPORT_FORMAT.to_string(),
        version: 1,
        inputs,
    };
    files::write_atomic(&out_dir.join(REPORT_FILE), &files::pretty_json(&report)?).ctx("writing report")?;
    Ok((curve_path, report))
}
