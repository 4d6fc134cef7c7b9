use dfokit::drivers::{
    criticality_measure, interpolation_radius_floor, run_classical_tr, run_convex_constrained, run_ibo_first_order,
    run_ibo_inaccurate, run_ibo_second_order, run_noisy_deterministic, run_self_correcting, run_storm,
    termination_check, Algorithm, IterStatus, SolveReport, TerminationReason, TerminationState, TrConfig,
    CRITICALITY_TOL,
};
use dfokit::linalg::{Matrix, Vector};
use dfokit::model::ModelKind;
use dfokit::problem::{lookup, make_noisy_oracle, FeasibleSet, NoiseMode, ObjectiveOracle};
use dfokit::DfoError;
use proptest::prelude::*;

fn v(xs: &[f64]) -> Vector {
    Vector::from_column_slice(xs)
}

fn config() -> TrConfig {
    TrConfig { grad_tol: 0.0, ..TrConfig::default() }
}

fn bowl_grad(x: &Vector) -> Vector {
    x.clone()
}

/// Checks the bookkeeping every report must satisfy.
fn check_report(report: &SolveReport, oracle: &ObjectiveOracle, cfg: &TrConfig) {
    assert!(report.delta_ratios_consistent(cfg), "radius updates disagree with statuses");
    assert!(report.statuses_legal());
    assert_eq!(report.evals, oracle.evaluations());
    let mut prev_evals = 0;
    let mut prev_best = f64::INFINITY;
    for (k, rec) in report.trace.iter().enumerate() {
        assert_eq!(rec.k, k);
        assert!(rec.evals >= prev_evals && rec.evals <= report.evals);
        assert!(rec.f_best <= prev_best);
        prev_evals = rec.evals;
        prev_best = rec.f_best;
    }
    assert!(report.evals <= cfg.max_evals);
}

#[test]
fn classical_converges_on_convex_quadratic() {
    let p = lookup("illcond5").unwrap();
    let oracle = p.oracle();
    let grad = p.gradient.clone().unwrap();
    let hess = p.hessian.clone().unwrap();
    let cfg = TrConfig { grad_tol: 1e-8, ..config() };
    let r = run_classical_tr(&oracle, &*grad, Some(&*hess), &p.x0, &cfg).unwrap();
    check_report(&r, &oracle, &cfg);
    assert!(grad(&r.x_vector()).norm() <= 1e-8);
    assert!(r.trace.len() <= 30);
    let interior = r.trace.iter().find(|rec| rec.rho.is_some()).unwrap();
    assert!((interior.rho.unwrap() - 1.0).abs() < 1e-10);
    assert_eq!(interior.status, IterStatus::VerySuccessful);
}

#[test]
fn classical_always_rejecting_halves_radius() {
    let x0 = v(&[0.0, 0.0]);
    let start = x0.clone();
    let oracle = ObjectiveOracle::new(2, move |x: &Vector| if *x == start { 0.0 } else { 1.0 });
    let cfg = TrConfig { max_evals: 20, ..config() };
    let r = run_classical_tr(&oracle, &|_: &Vector| v(&[1.0, 0.0]), None, &x0, &cfg).unwrap();
    assert!(r.trace.len() > 5);
    for w in r.trace.windows(2) {
        assert_eq!(w[0].status, IterStatus::Unsuccessful);
        assert_eq!(w[1].delta, 0.5 * w[0].delta);
    }
    assert_eq!(r.x, vec![0.0, 0.0]);
}

#[test]
fn first_order_bowl() {
    let p = lookup("bowl2").unwrap();
    let oracle = p.oracle();
    let cfg = TrConfig { max_evals: 500, ..config() };
    let r = run_ibo_first_order(&oracle, &p.x0, &cfg, ModelKind::Linear).unwrap();
    check_report(&r, &oracle, &cfg);
    let best = r.trace.iter().map(|rec| bowl_grad(&Vector::from_column_slice(&rec.x)).norm()).fold(f64::INFINITY, f64::min);
    assert!(best.min(bowl_grad(&r.x_vector()).norm()) <= 1e-4);
    assert!(r.evals < 500);
}

#[test]
fn criticality_skip_costs_only_the_model_build() {
    let p = lookup("bowl2").unwrap();
    let oracle = p.oracle();
    let r = run_ibo_first_order(&oracle, &p.x0, &config(), ModelKind::Linear).unwrap();
    let mut skips = 0;
    for w in r.trace.windows(2) {
        if w[1].status == IterStatus::CriticalitySkip {
            assert_eq!(w[1].evals - w[0].evals, 2);
            assert!(w[1].rho.is_none());
            skips += 1;
        }
    }
    assert!(skips > 0);
}

#[test]
fn first_order_rejects_unsupported_models() {
    let p = lookup("bowl2").unwrap();
    let r = run_ibo_first_order(&p.oracle(), &p.x0, &config(), ModelKind::FullQuadratic);
    assert!(matches!(r, Err(DfoError::Config(_))));
    let r = run_ibo_first_order(&p.oracle(), &p.x0, &config(), ModelKind::Composite);
    assert!(matches!(r, Err(DfoError::Config(_))));
}

#[test]
fn composite_driver_solves_least_squares_rosenbrock() {
    let p = lookup("rosenbrock-ls2").unwrap();
    let oracle = p.oracle();
    let cfg = config();
    let r = run_ibo_first_order(&oracle, &p.x0, &cfg, ModelKind::Composite).unwrap();
    check_report(&r, &oracle, &cfg);
    assert!(p.value(&r.x_vector()) < 1e-10);
}

#[test]
fn second_order_leaves_a_saddle_point() {
    let oracle = ObjectiveOracle::new(2, |x: &Vector| x[0] * x[0] - x[1] * x[1]);
    let cfg = TrConfig { max_evals: 60, ..config() };
    let r = run_ibo_second_order(&oracle, &v(&[0.0, 0.0]), &cfg).unwrap();
    let first = &r.trace[0];
    assert!(first.norm_g < 1e-12);
    assert!(first.measure.unwrap() > 1.0);
    assert_ne!(r.trace[1].x, vec![0.0, 0.0]);

    let oracle = ObjectiveOracle::new(2, |x: &Vector| x[0] * x[1]);
    let cfg = TrConfig { max_evals: 200, ..config() };
    let r = run_ibo_second_order(&oracle, &v(&[0.0, 0.0]), &cfg).unwrap();
    check_report(&r, &oracle, &cfg);
    assert!(r.f_best < -0.5);
    assert!(r.trace.iter().all(|rec| rec.delta <= cfg.delta_max));
}

#[test]
fn second_order_measure_on_convex_quadratic() {
    let p = lookup("bowl2").unwrap();
    let oracle = p.oracle();
    let cfg = config();
    let r = run_ibo_second_order(&oracle, &p.x0, &cfg).unwrap();
    check_report(&r, &oracle, &cfg);
    for rec in &r.trace {
        assert!((rec.measure.unwrap() - rec.norm_g).abs() <= 1e-12 * (1.0 + rec.norm_g));
    }
}

fn assert_unsuccessful_is_certified(r: &SolveReport) {
    for rec in &r.trace {
        if rec.status == IterStatus::Unsuccessful {
            assert_eq!(rec.certified, Some(true), "iteration {}", rec.k);
        }
    }
}

#[test]
fn inaccurate_driver_structure() {
    for name in ["bowl5", "rosenbrock2", "illcond5"] {
        let p = lookup(name).unwrap();
        let oracle = p.oracle();
        let cfg = config();
        let r = run_ibo_inaccurate(&oracle, &p.x0, &cfg).unwrap();
        check_report(&r, &oracle, &cfg);
        assert_unsuccessful_is_certified(&r);
        for w in r.trace.windows(2) {
            assert!(
                !(w[0].status == IterStatus::ModelImproving && w[1].status == IterStatus::ModelImproving),
                "{name}: consecutive model-improving iterations at {}",
                w[0].k
            );
            if w[0].status == IterStatus::ModelImproving {
                assert_eq!(w[1].delta, w[0].delta);
            }
        }
    }
}

#[test]
fn inaccurate_driver_saves_evaluations_on_quadratic() {
    let p = lookup("bowl5").unwrap();
    let cfg = TrConfig { grad_tol: 1e-4, max_evals: 5000, ..config() };
    let evals_to = |r: &SolveReport| {
        r.trace
            .iter()
            .find(|rec| rec.x.iter().map(|t| t * t).sum::<f64>().sqrt() <= 1e-4)
            .map(|rec| rec.evals)
            .or((r.x_vector().norm() <= 1e-4).then_some(r.evals))
    };
    let stencil = run_ibo_first_order(&p.oracle(), &p.x0, &cfg, ModelKind::Linear).unwrap();
    let persistent = run_ibo_inaccurate(&p.oracle(), &p.x0, &cfg).unwrap();
    let a = evals_to(&stencil).unwrap() as f64;
    let b = evals_to(&persistent).unwrap() as f64;
    assert!(b <= 0.7 * a, "persistent {b} vs stencil {a}");
}

#[test]
fn self_correcting_structure() {
    for (name, kind) in [
        ("bowl5", ModelKind::Linear),
        ("rosenbrock2", ModelKind::Linear),
        ("rosenbrock2", ModelKind::MinFrobenius),
        ("rosenbrock2", ModelKind::MinChangeFrobenius),
    ] {
        let p = lookup(name).unwrap();
        let oracle = p.oracle();
        let cfg = config();
        let r = run_self_correcting(&oracle, &p.x0, &cfg, kind).unwrap();
        check_report(&r, &oracle, &cfg);
        assert_unsuccessful_is_certified(&r);
        let n = p.n;
        let p_count = if kind == ModelKind::Linear { n + 1 } else { 2 * n + 1 };
        let mut streak = 0;
        for w in r.trace.windows(2) {
            if matches!(w[0].status, IterStatus::ReplaceDistant | IterStatus::ReplaceBad) {
                assert_eq!(w[1].x, w[0].x);
                assert_eq!(w[1].delta, w[0].delta);
                streak += 1;
                assert!(streak <= 5 * p_count, "{name}: {streak} consecutive replacements");
            } else {
                streak = 0;
            }
        }
    }
}

#[test]
fn self_correcting_convex_problem() {
    let p = lookup("bowl5").unwrap();
    let oracle = p.oracle();
    let cfg = TrConfig { delta_min: 1e-6, max_evals: 20_000, ..config() };
    let r = run_self_correcting(&oracle, &p.x0, &cfg, ModelKind::Linear).unwrap();
    assert_eq!(r.reason, TerminationReason::DeltaMin);
    assert!(r.x_vector().norm() <= 1e-3);
}

#[test]
fn persistent_drivers_reject_bad_model_kinds() {
    let p = lookup("bowl2").unwrap();
    let r = run_self_correcting(&p.oracle(), &p.x0, &config(), ModelKind::Composite);
    assert!(matches!(r, Err(DfoError::Config(_))));
}

#[test]
fn criticality_measure_examples() {
    assert_eq!(criticality_measure(&v(&[3.0, 4.0]), &v(&[0.0, 0.0]), &FeasibleSet::WholeSpace, CRITICALITY_TOL).unwrap(), 5.0);
    let orthant = FeasibleSet::boxed(vec![0.0, 0.0], vec![f64::INFINITY, f64::INFINITY]).unwrap();
    let zero = criticality_measure(&v(&[1.0, 1.0]), &v(&[0.0, 0.0]), &orthant, CRITICALITY_TOL).unwrap();
    assert!(zero.abs() < 1e-8);
    let one = criticality_measure(&v(&[1.0, -1.0]), &v(&[0.0, 0.0]), &orthant, CRITICALITY_TOL).unwrap();
    // Grid over the feasible quarter disc.
    let mut grid: f64 = 0.0;
    for i in 0..=200 {
        for j in 0..=200 {
            let d = v(&[i as f64 / 200.0, j as f64 / 200.0]);
            if d.norm() <= 1.0 {
                grid = grid.max(-(d[0] - d[1]));
            }
        }
    }
    assert!((one - grid).abs() < 1e-6 && (one - 1.0).abs() < 1e-6);

    let interior = v(&[5.0, 5.0]);
    let g = v(&[0.3, -0.4]);
    let pi = criticality_measure(&g, &interior, &orthant, CRITICALITY_TOL).unwrap();
    assert!((pi - 0.5).abs() < 1e-8);
}

#[test]
fn constrained_driver_on_shifted_box() {
    let p = lookup("box-shifted2").unwrap();
    let oracle = p.oracle();
    let cfg = config();
    let r = run_convex_constrained(&oracle, &p.feasible, &p.x0, &cfg).unwrap();
    check_report(&r, &oracle, &cfg);
    assert!(r.x_vector().norm() < 1e-6);
    let last = r.trace.last().unwrap();
    assert!(last.measure.unwrap() <= 1e-3);
    assert_eq!(r.eval_log.len() as u64, r.evals);
    assert!(r.eval_log.iter().all(|y| p.feasible.contains(&Vector::from_column_slice(y))));
}

#[test]
fn constrained_driver_on_slab() {
    let p = lookup("slab2").unwrap();
    let oracle = p.oracle();
    let cfg = config();
    let r = run_convex_constrained(&oracle, &p.feasible, &p.x0, &cfg).unwrap();
    check_report(&r, &oracle, &cfg);
    assert!(r.eval_log.iter().all(|y| p.feasible.contains(&Vector::from_column_slice(y))));
    if let Some(xs) = &p.x_star {
        assert!((r.x_vector() - xs).norm() < 1e-4);
    }
}

#[test]
fn constrained_driver_rejects_infeasible_start() {
    let p = lookup("box-shifted2").unwrap();
    let r = run_convex_constrained(&p.oracle(), &p.feasible, &v(&[-1.0, 0.5]), &config());
    assert!(matches!(r, Err(DfoError::InfeasibleStart)));
}

#[test]
fn constrained_whole_space_matches_first_order_while_radius_is_small() {
    let p = lookup("bowl2").unwrap();
    let cfg = TrConfig { delta0: 0.25, ..config() };
    let a = run_ibo_first_order(&p.oracle(), &p.x0, &cfg, ModelKind::Linear).unwrap();
    let b = run_convex_constrained(&p.oracle(), &FeasibleSet::WholeSpace, &p.x0, &cfg).unwrap();
    let mut compared = 0;
    for (ra, rb) in a.trace.iter().zip(&b.trace) {
        if ra.delta > 1.0 || rb.delta > 1.0 {
            break;
        }
        assert_eq!(ra.status, rb.status, "iteration {}", ra.k);
        compared += 1;
    }
    assert!(compared >= 3);
}

fn merged_config() -> TrConfig {
    TrConfig { eta_u: 0.7, eta_s: 0.7, ..config() }
}

#[test]
fn noisy_driver_without_noise_matches_first_order() {
    let p = lookup("rosenbrock2").unwrap();
    let cfg = TrConfig { max_evals: 600, ..merged_config() };
    let a = run_ibo_first_order(&p.oracle(), &p.x0, &cfg, ModelKind::Linear).unwrap();
    let b = run_noisy_deterministic(&p.oracle(), &p.x0, &cfg).unwrap();
    assert_eq!(a.trace.len(), b.trace.len());
    for (ra, rb) in a.trace.iter().zip(&b.trace) {
        assert_eq!(ra.x, rb.x);
        assert_eq!(ra.delta, rb.delta);
        let expected = match ra.status {
            IterStatus::VerySuccessful => IterStatus::Successful,
            s => s,
        };
        assert_eq!(rb.status, expected);
    }
}

#[test]
fn noisy_driver_checks_tolerance() {
    let p = lookup("bowl2").unwrap();
    let noisy = make_noisy_oracle(&p.oracle(), NoiseMode::BoundedDeterministic { eps_f: 1e-3, phase: 0 }).unwrap();
    let cfg = TrConfig { noise_r: 1e-3, ..config() };
    assert!(matches!(run_noisy_deterministic(&noisy, &p.x0, &cfg), Err(DfoError::Config(_))));
}

#[test]
fn noisy_driver_respects_radius_floor() {
    let p = lookup("bowl2").unwrap();
    let eps = 1e-4;
    let noisy = make_noisy_oracle(&p.oracle(), NoiseMode::BoundedDeterministic { eps_f: eps, phase: 1 }).unwrap();
    let cfg = TrConfig { noise_r: 2.0 * eps, ..config() };
    let r = run_noisy_deterministic(&noisy, &p.x0, &cfg).unwrap();
    check_report(&r, &noisy, &cfg);
    let floor = interpolation_radius_floor(2, eps, 1.0).unwrap();
    // Stencil points of a small-radius iteration sit at distance floor from the iterate.
    let small = r.trace.iter().position(|rec| rec.delta < floor).unwrap();
    let x = &r.trace[small].x;
    let before = r.trace[small - 1].evals as usize;
    let stencil_point = Vector::from_column_slice(&r.eval_log[before]);
    assert!(((stencil_point - Vector::from_column_slice(x)).norm() - floor).abs() < 1e-12);
    assert!(r.x_vector().norm() <= 2.0 * eps.sqrt());
}

#[test]
fn storm_without_noise_matches_first_order() {
    let p = lookup("bowl2").unwrap();
    let cfg = TrConfig { max_evals: 600, ..merged_config() };
    let stoch = make_noisy_oracle(&p.oracle(), NoiseMode::Stochastic { sigma: 0.0 }).unwrap();
    let a = run_ibo_first_order(&p.oracle(), &p.x0, &cfg, ModelKind::Linear).unwrap();
    let b = run_storm(&stoch, &p.x0, &cfg).unwrap();
    check_report(&b, &stoch, &cfg);
    for (ra, rb) in a.trace.iter().zip(&b.trace).take(40) {
        assert_eq!(ra.x, rb.x);
        assert_eq!(ra.delta, rb.delta);
        assert_eq!(rb.samples, Some(if rb.status == IterStatus::CriticalitySkip { 3 } else { 5 }));
    }
}

#[test]
fn storm_requires_stochastic_oracle_and_is_reproducible() {
    let p = lookup("bowl2").unwrap();
    assert!(matches!(run_storm(&p.oracle(), &p.x0, &config()), Err(DfoError::Config(_))));
    let cfg = TrConfig { max_evals: 200_000, seed: 3, ..config() };
    let run = || {
        let o = make_noisy_oracle(&p.oracle(), NoiseMode::Stochastic { sigma: 0.01 }).unwrap();
        run_storm(&o, &p.x0, &cfg).unwrap()
    };
    let a = run();
    let b = run();
    assert_eq!(a, b);
    assert!(a.trace.iter().all(|rec| rec.delta <= cfg.storm_delta_max()));
}

#[test]
fn termination_examples() {
    let cfg = TrConfig { grad_tol: 1e-8, ..TrConfig::default() };
    let base = TerminationState {
        iteration: 3,
        delta: 1e-3,
        delta_next: 1e-3,
        norm_g: 1.0,
        certified: false,
        evals_used: 10,
        evals_needed_next: 3,
    };
    assert_eq!(termination_check(&base, &cfg), None);
    let s = TerminationState { delta_next: cfg.delta_min / 2.0, ..base };
    assert_eq!(termination_check(&s, &cfg), Some(TerminationReason::DeltaMin));
    let s = TerminationState { evals_used: cfg.max_evals - 1, ..base };
    assert_eq!(termination_check(&s, &cfg), Some(TerminationReason::MaxEvals));
    let s = TerminationState { certified: true, norm_g: 1e-9, delta: 1e-10, ..base };
    assert_eq!(termination_check(&s, &cfg), Some(TerminationReason::GradientTolWithCertificate));
    let s = TerminationState { certified: false, norm_g: 1e-9, delta: 1e-10, ..base };
    assert_eq!(termination_check(&s, &cfg), None);
    let s = TerminationState { certified: true, norm_g: 1e-9, delta: 1e-8, ..base };
    assert_eq!(termination_check(&s, &cfg), None);
}

#[test]
fn budget_runs_out_mid_build() {
    let p = lookup("bowl5").unwrap();
    let oracle = p.oracle();
    let cfg = TrConfig { max_evals: 13, ..config() };
    let r = run_ibo_first_order(&oracle, &p.x0, &cfg, ModelKind::Linear).unwrap();
    assert_eq!(r.reason, TerminationReason::MaxEvals);
    assert!(r.evals <= 13);
}

#[test]
fn immediate_delta_min_gives_empty_trace() {
    let p = lookup("bowl2").unwrap();
    let cfg = TrConfig { delta0: 1e-9, delta_max: 1.0, ..config() };
    let r = run_ibo_first_order(&p.oracle(), &p.x0, &cfg, ModelKind::Linear).unwrap();
    assert_eq!(r.reason, TerminationReason::DeltaMin);
    assert!(r.trace.is_empty());
}

#[test]
fn radius_decays_on_constant_objective() {
    let cfg = TrConfig { max_evals: 10_000, delta_min: 0.0, max_iters: 40, ..config() };
    let x0 = v(&[0.3, -0.2, 0.1]);
    let oracle = ObjectiveOracle::new(3, |_: &Vector| 1.0);
    let r = run_ibo_first_order(&oracle, &x0, &cfg, ModelKind::Linear).unwrap();
    for (k, rec) in r.trace.iter().enumerate() {
        assert!(rec.delta <= cfg.gamma_dec.powi(k as i32) * cfg.delta0 * (1.0 + 1e-12));
    }
    let oracle = ObjectiveOracle::new(3, |_: &Vector| 1.0);
    let r = run_ibo_inaccurate(&oracle, &x0, &cfg).unwrap();
    for (k, rec) in r.trace.iter().enumerate() {
        assert!(rec.delta <= cfg.gamma_dec.powi((k / 2) as i32) * cfg.delta0 * (1.0 + 1e-12));
    }
}

#[test]
fn config_validation() {
    assert!(TrConfig::default().validate().is_ok());
    for bad in [
        TrConfig { gamma_dec: 1.0, ..TrConfig::default() },
        TrConfig { gamma_inc: 1.0, ..TrConfig::default() },
        TrConfig { eta_u: 0.8, ..TrConfig::default() },
        TrConfig { beta: 1.0, ..TrConfig::default() },
        TrConfig { lambda_threshold: 0.5, ..TrConfig::default() },
        TrConfig { alpha_m: 0.5, ..TrConfig::default() },
        TrConfig { alpha_m: 0.7, alpha_f: 0.7, ..TrConfig::default() },
    ] {
        assert!(matches!(bad.validate(), Err(DfoError::Config(_))));
    }
}

#[test]
fn legal_statuses_per_algorithm() {
    assert!(!Algorithm::FirstOrder.legal_statuses().contains(&IterStatus::ModelImproving));
    assert!(Algorithm::SelfCorrecting.legal_statuses().contains(&IterStatus::ReplaceBad));
    assert!(!Algorithm::Storm.legal_statuses().contains(&IterStatus::VerySuccessful));
}

fn random_quadratic(seed: u64) -> (ObjectiveOracle, Vector) {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let a = Matrix::from_fn(3, 3, |_, _| rng.random_range(-1.0..1.0));
    let h = &a * a.transpose() + Matrix::identity(3, 3) * 0.1;
    let b = Vector::from_fn(3, |_, _| rng.random_range(-1.0..1.0));
    let x0 = Vector::from_fn(3, |_, _| rng.random_range(-2.0..2.0));
    (ObjectiveOracle::new(3, move |x: &Vector| 0.5 * x.dot(&(&h * x)) + b.dot(x)), x0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn every_driver_keeps_its_bookkeeping(seed in 0u64..10_000, algo in 0usize..6) {
        let (oracle, x0) = random_quadratic(seed);
        let cfg = TrConfig { max_evals: 300, ..config() };
        let r = match algo {
            0 => run_ibo_first_order(&oracle, &x0, &cfg, ModelKind::Linear),
            1 => run_ibo_first_order(&oracle, &x0, &cfg, ModelKind::MinFrobenius),
            2 => run_ibo_second_order(&oracle, &x0, &cfg),
            3 => run_ibo_inaccurate(&oracle, &x0, &cfg),
            4 => run_self_correcting(&oracle, &x0, &cfg, ModelKind::MinFrobenius),
            _ => run_convex_constrained(&oracle, &FeasibleSet::halfspace(vec![1.0, 1.0, 1.0], 10.0).unwrap(), &x0.map(|t| t.min(3.0)), &cfg),
        }.unwrap();
        check_report(&r, &oracle, &cfg);
        prop_assert_eq!(r.eval_log.len() as u64, r.evals);
        if matches!(algo, 3 | 4) {
            assert_unsuccessful_is_certified(&r);
        }
    }
}
