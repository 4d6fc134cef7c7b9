use dfokit_bench::config::parse_algorithm;
use dfokit_bench::{compare_runs, execute, resolve, BenchError, RunArgs, RunReport, COMPARE_TOLERANCES};

fn run(problem: &str, algo: &str, extra: RunArgs) -> RunReport {
    let args = RunArgs { problem: Some(problem.into()), algo: Some(parse_algorithm(algo).unwrap()), ..extra };
    execute(&resolve(&args, None).unwrap()).unwrap()
}

#[test]
fn single_report_gives_single_row() {
    let table = compare_runs(&[run("bowl2", "first-order", RunArgs::default())]).unwrap();
    assert_eq!(table.rows.len(), 1);
    assert_eq!(table.rows[0].label, "first-order/linear");
    assert_eq!(table.rows[0].evals_to_tol.len(), COMPARE_TOLERANCES.len());
    assert_eq!(table.f_ref, 0.0);
}

#[test]
fn two_algorithms_on_the_bowl_both_reach_the_tightest_tolerance() {
    let a = run("bowl2", "first-order", RunArgs::default());
    let b = run("bowl2", "inaccurate", RunArgs::default());
    let table = compare_runs(&[a.clone(), b]).unwrap();
    for row in &table.rows {
        let cells: Vec<u64> = row.evals_to_tol.iter().map(|c| c.expect("tolerance reached")).collect();
        assert!(cells.windows(2).all(|w| w[0] <= w[1]), "{cells:?}");
    }
    // Cross-check one cell against the trace directly.
    let expected = a.trace.iter().find(|r| r.f_best <= 1e-4).unwrap().evals;
    assert_eq!(table.rows[0].evals_to_tol[1], Some(expected));
}

#[test]
fn unreached_tolerance_is_a_dash() {
    let short = run("rosenbrock2", "first-order", RunArgs { max_evals: Some(30), ..RunArgs::default() });
    let table = compare_runs(&[short]).unwrap();
    assert_eq!(table.rows[0].evals_to_tol[2], None);
    let text = table.to_string();
    assert!(text.contains('—'), "{text}");
    assert!(text.contains("rosenbrock2"));
}

#[test]
fn mixed_problems_are_rejected() {
    let a = run("bowl2", "first-order", RunArgs::default());
    let b = run("rosenbrock2", "first-order", RunArgs { max_evals: Some(30), ..RunArgs::default() });
    match compare_runs(&[a, b]) {
        Err(BenchError::MixedProblems(x, y)) => assert_eq!((x.as_str(), y.as_str()), ("bowl2", "rosenbrock2")),
        other => panic!("expected MixedProblems, got {other:?}"),
    }
    assert!(matches!(compare_runs(&[]), Err(BenchError::Config(_))));
}
