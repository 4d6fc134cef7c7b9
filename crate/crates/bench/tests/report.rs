use dfokit::drivers::{Algorithm, TerminationReason};
use dfokit_bench::config::parse_algorithm;
use dfokit_bench::{
    execute, export_report, load_report, load_trace_csv, resolve, ReportFormat, RunArgs, RunConfig, RunReport,
};

fn config(problem: &str, algo: &str, extra: RunArgs) -> RunConfig {
    let args = RunArgs { problem: Some(problem.into()), algo: Some(parse_algorithm(algo).unwrap()), ..extra };
    resolve(&args, None).unwrap()
}

fn long_run() -> RunReport {
    let c = config("rosenbrock2", "first-order", RunArgs { max_evals: Some(2000), ..RunArgs::default() });
    let r = execute(&c).unwrap();
    assert!(r.trace.len() >= 100, "{} rows", r.trace.len());
    r
}

#[test]
fn json_round_trip_reproduces_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    let report = long_run();
    export_report(&report, &path, ReportFormat::Json).unwrap();
    let back = load_report(&path).unwrap();
    assert_eq!(back, report);
    let value: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    for key in ["problem", "algo", "seed", "config"] {
        assert!(value["meta"].get(key).is_some(), "meta.{key}");
    }
    for key in ["k", "delta", "norm_g", "rho", "status", "evals"] {
        assert!(value["trace"][0].get(key).is_some(), "trace.{key}");
    }
    for key in ["x", "f", "reason"] {
        assert!(value["result"].get(key).is_some(), "result.{key}");
    }
    assert_eq!(value["meta"]["algo"], "first-order");
}

#[test]
fn csv_round_trip_and_row_count() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.csv");
    assert_eq!(ReportFormat::from_path(&path), ReportFormat::Csv);
    let report = long_run();
    export_report(&report, &path, ReportFormat::Csv).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), report.trace.len() + 1);
    assert!(text.starts_with("k,delta,norm_g,rho,status,evals"));
    assert_eq!(load_trace_csv(&path).unwrap(), report.trace);
}

#[test]
fn empty_trace_exports_cleanly() {
    let c = config("bowl2", "first-order", RunArgs { delta0: Some(1e-9), ..RunArgs::default() });
    let report = execute(&c).unwrap();
    assert!(report.trace.is_empty());
    assert_eq!(report.result.reason, TerminationReason::DeltaMin);

    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("empty.json");
    export_report(&report, &json, ReportFormat::Json).unwrap();
    let value: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(value["trace"], serde_json::json!([]));
    assert_eq!(load_report(&json).unwrap(), report);

    let csv = dir.path().join("empty.csv");
    export_report(&report, &csv, ReportFormat::Csv).unwrap();
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 1);
    assert!(load_trace_csv(&csv).unwrap().is_empty());
}

#[test]
fn io_errors_carry_the_path() {
    let report = long_run();
    let path = std::path::Path::new("/nonexistent-dir/run.json");
    let err = export_report(&report, path, ReportFormat::Json).unwrap_err();
    assert!(err.to_string().contains("/nonexistent-dir/run.json"));
    assert_eq!(err.exit_code(), 3);
    assert!(load_report(path).unwrap_err().to_string().contains("nonexistent-dir"));
}

#[test]
fn identical_configs_give_identical_json() {
    for (problem, algo, extra) in [
        ("rosenbrock2", "self-correcting", RunArgs::default()),
        ("bowl2", "storm", RunArgs { noise_sigma: Some(0.01), max_evals: Some(20_000), seed: Some(3), ..RunArgs::default() }),
        ("bowl2", "noisy-deterministic", RunArgs { noise_epsf: Some(1e-4), seed: Some(1), ..RunArgs::default() }),
    ] {
        let c = config(problem, algo, extra);
        assert_eq!(execute(&c).unwrap().to_json(), execute(&c).unwrap().to_json(), "{problem} {algo}");
    }
}

#[test]
fn every_variant_writes_legal_statuses() {
    let runs: Vec<(&str, &str, RunArgs)> = vec![
        ("illcond5", "classical", RunArgs::default()),
        ("bowl5", "first-order", RunArgs::default()),
        ("bowl2", "second-order", RunArgs::default()),
        ("bowl5", "inaccurate", RunArgs::default()),
        ("rosenbrock2", "self-correcting", RunArgs::default()),
        ("box-shifted2", "convex-constrained", RunArgs::default()),
        ("bowl2", "noisy-deterministic", RunArgs { noise_epsf: Some(1e-6), ..RunArgs::default() }),
        ("bowl2", "storm", RunArgs { noise_sigma: Some(0.01), max_evals: Some(20_000), ..RunArgs::default() }),
    ];
    for (problem, algo, extra) in runs {
        let c = config(problem, algo, extra);
        let r = execute(&c).unwrap();
        let legal = c.algo.legal_statuses();
        assert!(r.trace.iter().all(|row| legal.contains(&row.status)), "{problem} {algo}");
        assert!(r.result.evals <= c.tr.max_evals);
        assert_eq!(r.meta.algo, c.algo);
        assert!(r.result.norm_grad.is_some());
    }
    assert_eq!(Algorithm::ALL.len(), 8);
}

#[test]
fn radius_floor_runs_carry_a_gradient_bound() {
    let r = execute(&config("bowl5", "first-order", RunArgs::default())).unwrap();
    assert_eq!(r.result.reason, TerminationReason::DeltaMin);
    let bound = r.result.termination_bound.expect("bowl5 has a known Lipschitz constant");
    assert!(r.result.norm_grad.unwrap() <= bound, "{:?} > {bound}", r.result.norm_grad);

    let r = execute(&config("bowl5", "inaccurate", RunArgs::default())).unwrap();
    assert_eq!(r.result.termination_bound, None);
}
