use crate::error::Result;
use crate::linalg::{Matrix, Vector};
use crate::problem::ObjectiveOracle;

use super::{
    classify, next_delta, start_checks, termination_check, tr_step, Algorithm, Evaluator, IterStatus,
    IterationRecord, SolveReport, TerminationReason, TerminationState, TrConfig,
};

/// Symmetric rank-one update, skipped when the denominator is relatively tiny.
fn sr1_update(h: &mut Matrix, s: &Vector, y: &Vector) {
    let r = y - &*h * s;
    let denom = s.dot(&r);
    if denom.abs() >= 1e-8 * s.norm() * r.norm() && denom != 0.0 {
        *h += &r * r.transpose() / denom;
    }
}

/// Derivative-based trust-region method with exact gradients.
///
/// Uses `hessian` when supplied, otherwise symmetric-rank-one updates from the identity.
/// Stops with `GradientTolWithCertificate` once `‖∇f(x_k)‖ ≤ grad_tol`.
pub fn run_classical_tr(
    oracle: &ObjectiveOracle,
    gradient: &dyn Fn(&Vector) -> Vector,
    hessian: Option<&dyn Fn(&Vector) -> Matrix>,
    x0: &Vector,
    config: &TrConfig,
) -> Result<SolveReport> {
    start_checks(config, oracle, x0)?;
    let algo = Algorithm::Classical;
    let n = x0.len();
    let mut ev = Evaluator::new(oracle, config);
    let mut x = x0.clone();
    let mut fx = ev.eval(&x)?;
    let mut delta = config.delta0;
    let mut trace = Vec::new();
    if delta < config.delta_min {
        return Ok(ev.into_report(algo, &x, delta, fx, TerminationReason::DeltaMin, trace));
    }
    let mut h_sr1 = Matrix::identity(n, n);
    let mut g = gradient(&x);
    for k in 0..config.max_iters {
        let (x_k, norm_g) = (x.as_slice().to_vec(), g.norm());
        if config.grad_tol > 0.0 && g.norm() <= config.grad_tol {
            return Ok(ev.into_report(algo, &x, delta, fx, TerminationReason::GradientTolWithCertificate, trace));
        }
        if !ev.can_afford(1) {
            return Ok(ev.into_report(algo, &x, delta, fx, TerminationReason::MaxEvals, trace));
        }
        let h = match hessian {
            Some(hf) => hf(&x),
            None => h_sr1.clone(),
        };
        let step = tr_step(&g, &h, delta)?;
        let (rho, f_new) = if step.predicted_decrease > 0.0 {
            let x_new = &x + &step.s;
            let f_new = ev.eval(&x_new)?;
            (Some((fx - f_new) / step.predicted_decrease), Some(f_new))
        } else {
            (None, None)
        };
        let status = classify(rho, config);
        if let Some(f_new) = f_new {
            if hessian.is_none() {
                let g_trial = gradient(&(&x + &step.s));
                sr1_update(&mut h_sr1, &step.s, &(&g_trial - &g));
            }
            if status != IterStatus::Unsuccessful {
                x += &step.s;
                fx = f_new;
                g = gradient(&x);
            }
        }
        trace.push(IterationRecord {
            k,
            x: x_k,
            delta,
            norm_g,
            measure: None,
            rho,
            status,
            evals: ev.used(),
            f_best: ev.f_best,
            certified: None,
            samples: None,
        });
        let delta_next = next_delta(algo, status, delta, config);
        let state = TerminationState {
            iteration: k,
            delta,
            delta_next,
            norm_g,
            certified: false,
            evals_used: ev.used(),
            evals_needed_next: 1,
        };
        delta = delta_next;
        if let Some(reason) = termination_check(&state, config) {
            return Ok(ev.into_report(algo, &x, delta, fx, reason, trace));
        }
    }
    Ok(ev.into_report(algo, &x, delta, fx, TerminationReason::IterationCap, trace))
}
