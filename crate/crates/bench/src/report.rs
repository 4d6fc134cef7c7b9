//! Report schema and JSON/CSV export.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use dfokit::drivers::{Algorithm, IterStatus, IterationRecord, SolveReport, TerminationReason};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{BenchError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub problem: String,
    pub algo: Algorithm,
    pub seed: u64,
    pub config: RunConfig,
}

/// One trace row; `measure` is the second-order or constrained criticality value where defined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub k: usize,
    pub delta: f64,
    pub norm_g: f64,
    pub rho: Option<f64>,
    pub status: IterStatus,
    pub evals: u64,
    pub f_best: f64,
    pub measure: Option<f64>,
}

impl TraceRow {
    pub const HEADER: [&'static str; 8] = ["k", "delta", "norm_g", "rho", "status", "evals", "f_best", "measure"];
}

impl From<&IterationRecord> for TraceRow {
    fn from(r: &IterationRecord) -> Self {
        TraceRow {
            k: r.k,
            delta: r.delta,
            norm_g: r.norm_g,
            rho: r.rho,
            status: r.status,
            evals: r.evals,
            f_best: r.f_best,
            measure: r.measure,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub x: Vec<f64>,
    /// Objective value at the final iterate as seen by the driver.
    pub f: f64,
    pub f_best: f64,
    /// Exact `‖∇f‖` at the final iterate, when the problem has an analytic gradient.
    pub norm_grad: Option<f64>,
    pub reason: TerminationReason,
    pub evals: u64,
    pub delta: f64,
    /// Guaranteed `‖∇f‖` bound for a first-order linear run stopped by the radius floor, when `L_∇f` is known.
    #[serde(default)]
    pub termination_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub meta: Meta,
    pub trace: Vec<TraceRow>,
    pub result: RunResult,
}

impl RunReport {
    pub fn new(
        config: &RunConfig,
        solve: &SolveReport,
        norm_grad: Option<f64>,
        termination_bound: Option<f64>,
    ) -> Self {
        RunReport {
            meta: Meta { problem: config.problem.clone(), algo: config.algo, seed: config.seed(), config: config.clone() },
            trace: solve.trace.iter().map(TraceRow::from).collect(),
            result: RunResult {
                x: solve.x.clone(),
                f: solve.f_final,
                f_best: solve.f_best,
                norm_grad,
                reason: solve.reason,
                evals: solve.evals,
                delta: solve.delta,
                termination_bound,
            },
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports contain no maps with non-string keys");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl ReportFormat {
    /// CSV for a `.csv` extension, JSON otherwise.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => ReportFormat::Csv,
            _ => ReportFormat::Json,
        }
    }
}

/// Writes the full report as JSON, or the trace table as CSV with a header row.
pub fn export_report(report: &RunReport, path: &Path, format: ReportFormat) -> Result<()> {
    let file = File::create(path).map_err(|e| BenchError::io(path, e))?;
    match format {
        ReportFormat::Json => {
            let mut w = BufWriter::new(file);
            w.write_all(report.to_json().as_bytes()).and_then(|_| w.flush()).map_err(|e| BenchError::io(path, e))
        }
        ReportFormat::Csv => {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
            let csv_err = |e: csv::Error| BenchError::format(path, e);
            w.write_record(TraceRow::HEADER).map_err(csv_err)?;
            for row in &report.trace {
                w.serialize(row).map_err(csv_err)?;
            }
            w.flush().map_err(|e| BenchError::io(path, e))
        }
    }
}

pub fn load_report(path: &Path) -> Result<RunReport> {
    let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| BenchError::format(path, e))
}

pub fn load_trace_csv(path: &Path) -> Result<Vec<TraceRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| BenchError::format(path, e))?;
    r.deserialize().map(|row| row.map_err(|e| BenchError::format(path, e))).collect()
}
