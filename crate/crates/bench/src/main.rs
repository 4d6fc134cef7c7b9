use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dfokit_bench::config::algorithm_name;
use dfokit_bench::{
    compare_runs, execute, export_report, load_report, resolve, verify_constants, BenchError, CheckTable,
    ReportFormat, RunArgs, SEED_ENV,
};

#[derive(Parser)]
#[command(name = "dfokit", version, about = "Derivative-free trust-region benchmark harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem with one driver and write a report.
    Run {
        #[command(flatten)]
        args: RunArgs,
        /// Report path; a `.csv` extension writes the trace table instead of JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the closed-form stencil constants and print a pass/fail table.
    VerifyConstants,
    /// Evaluations-to-tolerance table for JSON reports on the same problem.
    Compare {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
    },
}

fn run(args: &RunArgs, out: Option<&Path>) -> Result<(), BenchError> {
    let env_seed = std::env::var(SEED_ENV).ok();
    let config = resolve(args, env_seed.as_deref())?;
    let report = execute(&config)?;
    let path = out.map(Path::to_path_buf).unwrap_or_else(|| {
        PathBuf::from(format!("{}_{}_seed{}.json", config.problem, algorithm_name(config.algo), config.seed()))
    });
    export_report(&report, &path, ReportFormat::from_path(&path))?;
    let r = &report.result;
    let grad = r.norm_grad.map_or_else(|| "n/a".to_string(), |g| format!("{g:.3e}"));
    println!(
        "{} {}: f={:.6e} |grad f|={grad} evals={} reason={:?} report={}",
        config.problem,
        algorithm_name(config.algo),
        r.f,
        r.evals,
        r.reason,
        path.display()
    );
    Ok(())
}

fn compare(paths: &[PathBuf]) -> Result<(), BenchError> {
    let reports = paths.iter().map(|p| load_report(p)).collect::<Result<Vec<_>, _>>()?;
    print!("{}", compare_runs(&reports)?);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run { args, out } => run(args, out.as_deref()),
        Command::Compare { reports } => compare(reports),
        Command::VerifyConstants => match verify_constants() {
            Ok(checks) => {
                println!("{}", CheckTable(&checks));
                return if checks.iter().all(|c| c.pass) { ExitCode::SUCCESS } else { ExitCode::from(1) };
            }
            Err(e) => Err(e.into()),
        },
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
