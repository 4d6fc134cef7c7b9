//! IBO trust-region method over a closed convex feasible set.

use crate::error::{DfoError, Result};
use crate::geometry::{improve_geometry, init_feasible_set, lagrange_basis};
use crate::linalg::Vector;
use crate::model::BasisKind;
use crate::problem::{FeasibleSet, ObjectiveOracle};
use crate::trs::projected_gradient_cauchy;

use super::{
    classify, next_delta, start_checks, termination_check, Algorithm, Evaluator, IterStatus, IterationRecord,
    SolveReport, TerminationReason, TerminationState, TrConfig,
};

/// Default stopping tolerance on the objective change in [`criticality_measure`].
pub const CRITICALITY_TOL: f64 = 1e-8;
/// Iteration limit of [`criticality_measure`].
pub const CRITICALITY_MAX_ITERS: usize = 10_000;

/// `|min gᵀd|` over `x + d ∈ C`, `‖d‖ ≤ 1`, by projected gradient on the normalized direction.
///
/// Falls back to the running average of the iterates if the plain iteration stalls with
/// oscillating objective values. Returns `‖g‖` for the whole space.
pub fn criticality_measure(g: &Vector, x: &Vector, set: &FeasibleSet, tol: f64) -> Result<f64> {
    crate::linalg::ensure_dim(x, g.len())?;
    crate::linalg::ensure_finite_vec(g, "model gradient")?;
    let gn = g.norm();
    if set.is_whole_space() || gn == 0.0 {
        return Ok(gn);
    }
    let gh = g / gn;
    let proj = |d: &Vector| -> Result<Vector> { Ok(set.project_with_ball(&(x + d), x, 1.0)? - x) };
    let mut d = Vector::zeros(g.len());
    let mut obj = 0.0;
    let mut avg = Vector::zeros(g.len());
    for it in 1..=CRITICALITY_MAX_ITERS {
        let next = proj(&(&d - &gh))?;
        let next_obj = gh.dot(&next);
        avg += (&next - &avg) / it as f64;
        if (next_obj - obj).abs() <= tol {
            let best = next_obj.min(gh.dot(&proj(&avg)?));
            return Ok(gn * (-best).max(0.0));
        }
        d = next;
        obj = next_obj;
    }
    Err(DfoError::NonConvergence { what: "criticality measure", iters: CRITICALITY_MAX_ITERS })
}

/// Constrained IBO trust-region method. Every oracle call is at a feasible point.
pub fn run_convex_constrained(
    oracle: &ObjectiveOracle,
    set: &FeasibleSet,
    x0: &Vector,
    config: &TrConfig,
) -> Result<SolveReport> {
    start_checks(config, oracle, x0)?;
    set.validate()?;
    if !set.contains(x0) {
        return Err(DfoError::InfeasibleStart);
    }
    let algo = Algorithm::ConvexConstrained;
    let mut ev = Evaluator::new(oracle, config);
    let mut x = x0.clone();
    let mut fx = ev.eval(&x)?;
    let mut delta = config.delta0;
    let mut trace = Vec::new();
    if delta < config.delta_min {
        return Ok(ev.into_report(algo, &x, delta, fx, TerminationReason::DeltaMin, trace));
    }
    let per_iter = x0.len() as u64 + 1;
    for k in 0..config.max_iters {
        if !ev.can_afford(per_iter) {
            return Ok(ev.into_report(algo, &x, delta, fx, TerminationReason::MaxEvals, trace));
        }
        let x_k = x.as_slice().to_vec();
        let initial = init_feasible_set(&x, delta, BasisKind::Linear, set)?;
        let improved =
            improve_geometry(lagrange_basis(&initial)?, &x, delta, config.lambda_threshold, Some(set), Some(0))?;
        let ys = improved.set();
        let mut fvals = Vector::zeros(ys.p());
        fvals[0] = fx;
        for i in 1..ys.p() {
            debug_assert!(set.contains(ys.point(i)));
            fvals[i] = ev.eval(ys.point(i))?;
        }
        let model = improved.basis.system.model(ys, &fvals, None)?;
        let norm_g = model.g.norm();
        let pi = criticality_measure(&model.g, &x, set, CRITICALITY_TOL)?;
        let (status, rho) = if pi < config.mu_c * delta {
            (IterStatus::CriticalitySkip, None)
        } else {
            let step = projected_gradient_cauchy(&model.g, &model.h, delta, &x, set, pi)?;
            if step.predicted_decrease > 0.0 {
                let x_new = &x + &step.s;
                debug_assert!(set.contains(&x_new));
                let f_new = ev.eval(&x_new)?;
                let rho = (fx - f_new) / step.predicted_decrease;
                let status = classify(Some(rho), config);
                if status != IterStatus::Unsuccessful {
                    x = x_new;
                    fx = f_new;
                }
                (status, Some(rho))
            } else {
                (IterStatus::Unsuccessful, None)
            }
        };
        trace.push(IterationRecord {
            k,
            x: x_k,
            delta,
            norm_g,
            measure: Some(pi),
            rho,
            status,
            evals: ev.used(),
            f_best: ev.f_best,
            certified: Some(true),
            samples: None,
        });
        let delta_next = next_delta(algo, status, delta, config);
        let state = TerminationState {
            iteration: k,
            delta,
            delta_next,
            norm_g: pi,
            certified: true,
            evals_used: ev.used(),
            evals_needed_next: per_iter,
        };
        delta = delta_next;
        if let Some(reason) = termination_check(&state, config) {
            return Ok(ev.into_report(algo, &x, delta, fx, reason, trace));
        }
    }
    Ok(ev.into_report(algo, &x, delta, fx, TerminationReason::IterationCap, trace))
}
