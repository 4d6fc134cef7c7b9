//! Benchmark harness for the `dfokit` drivers: run configuration, reports and comparisons.

pub mod compare;
pub mod config;
pub mod error;
pub mod report;
pub mod run;
pub mod verify;

pub use compare::{compare_runs, Comparison, COMPARE_TOLERANCES};
pub use config::{resolve, RunArgs, RunConfig, SEED_ENV};
pub use error::{BenchError, Result};
pub use report::{export_report, load_report, load_trace_csv, ReportFormat, RunReport, TraceRow};
pub use run::{execute, termination_bound};
pub use verify::{verify_constants, CheckTable, ConstantCheck};
