use std::fmt;

use dfokit::problem::lookup;

use crate::config::algorithm_name;
use crate::error::{BenchError, Result};
use crate::report::RunReport;

/// Tolerances on `f_best − f_ref` reported by [`compare_runs`].
pub const COMPARE_TOLERANCES: [f64; 3] = [1e-2, 1e-4, 1e-6];

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub label: String,
    /// Evaluations used when the best value first came within each tolerance.
    pub evals_to_tol: Vec<Option<u64>>,
    pub f_best: f64,
    pub evals: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub problem: String,
    /// Known optimal value, or the best value over all runs when none is registered.
    pub f_ref: f64,
    pub rows: Vec<ComparisonRow>,
}

/// Evaluations-to-tolerance table for reports on a single problem.
pub fn compare_runs(reports: &[RunReport]) -> Result<Comparison> {
    let first = reports.first().ok_or_else(|| BenchError::config("no reports to compare"))?;
    let problem = first.meta.problem.clone();
    if let Some(other) = reports.iter().find(|r| r.meta.problem != problem) {
        return Err(BenchError::MixedProblems(problem, other.meta.problem.clone()));
    }
    let f_ref = lookup(&problem)
        .ok()
        .and_then(|p| p.f_star)
        .unwrap_or_else(|| reports.iter().map(|r| r.result.f_best).fold(f64::INFINITY, f64::min));
    let rows = reports
        .iter()
        .map(|r| {
            let mut label = algorithm_name(r.meta.algo).to_string();
            if let Some(m) = r.meta.config.model {
                label = format!("{label}/{}", m.name());
            }
            let evals_to_tol = COMPARE_TOLERANCES
                .iter()
                .map(|&tol| r.trace.iter().find(|row| row.f_best - f_ref <= tol).map(|row| row.evals))
                .collect();
            ComparisonRow { label, evals_to_tol, f_best: r.result.f_best, evals: r.result.evals }
        })
        .collect();
    Ok(Comparison { problem, f_ref, rows })
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "problem {} (f_ref = {:.4e})", self.problem, self.f_ref)?;
        let width = self.rows.iter().map(|r| r.label.len()).max().unwrap_or(0).max(9);
        write!(f, "{:<width$}", "algorithm")?;
        for tol in COMPARE_TOLERANCES {
            write!(f, " {:>10}", format!("{tol:.0e}"))?;
        }
        writeln!(f, " {:>12} {:>10}", "f_best", "evals")?;
        for row in &self.rows {
            write!(f, "{:<width$}", row.label)?;
            for cell in &row.evals_to_tol {
                match cell {
                    Some(e) => write!(f, " {e:>10}")?,
                    None => write!(f, " {:>10}", "—")?,
                }
            }
            writeln!(f, " {:>12.4e} {:>10}", row.f_best, row.evals)?;
        }
        Ok(())
    }
}
