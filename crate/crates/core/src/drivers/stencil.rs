//! Drivers that rebuild the model on a fresh stencil around every iterate.

use crate::error::{DfoError, Result};
use crate::linalg::{min_eigenpair, Vector};
use crate::model::{build_composite_least_squares, BasisKind, InterpSystem, InterpolationSet, ModelKind, QuadraticModel};
use crate::problem::ObjectiveOracle;
use crate::trs::solve_trs_secondorder;

use super::{
    classify, next_delta, start_checks, termination_check, tr_step, Algorithm, Evaluator, IterStatus,
    IterationRecord, SolveReport, TerminationReason, TerminationState, TrConfig,
};

pub(crate) struct StencilSpec {
    pub algo: Algorithm,
    pub basis: BasisKind,
    pub composite: bool,
    pub second_order: bool,
    /// Lower bound on the stencil radius.
    pub radius_floor: f64,
    /// Added to the actual decrease in the ratio test.
    pub ratio_shift: f64,
}

/// Value at an iterate: the objective and, for composite models, the residual vector.
#[derive(Clone)]
struct PointValue {
    f: f64,
    r: Option<Vector>,
}

fn evaluate(ev: &mut Evaluator, x: &Vector, composite: bool) -> Result<PointValue> {
    if composite {
        let r = ev.residuals(x)?;
        Ok(PointValue { f: 0.5 * r.norm_squared(), r: Some(r) })
    } else {
        Ok(PointValue { f: ev.eval(x)?, r: None })
    }
}

fn stencil_model(
    ev: &mut Evaluator,
    x: &Vector,
    at_x: &PointValue,
    radius: f64,
    spec: &StencilSpec,
) -> Result<QuadraticModel> {
    let set = InterpolationSet::canonical(x, radius, spec.basis)?;
    let mut values = vec![at_x.clone()];
    for y in &set.points()[1..] {
        values.push(evaluate(ev, y, spec.composite)?);
    }
    if spec.composite {
        let residuals: Vec<Vector> = values.into_iter().map(|v| v.r.expect("composite residual")).collect();
        build_composite_least_squares(&set, &residuals)
    } else {
        let f = Vector::from_iterator(values.len(), values.iter().map(|v| v.f));
        InterpSystem::assemble(&set)?.model(&set, &f, None)
    }
}

pub(crate) fn run_stencil_loop(
    oracle: &ObjectiveOracle,
    x0: &Vector,
    config: &TrConfig,
    spec: StencilSpec,
) -> Result<SolveReport> {
    start_checks(config, oracle, x0)?;
    if spec.composite && !oracle.has_residuals() {
        return Err(DfoError::config("composite models need an oracle with residuals"));
    }
    let algo = spec.algo;
    let two_way = matches!(algo, Algorithm::NoisyDeterministic);
    let mut ev = Evaluator::new(oracle, config);
    let mut x = x0.clone();
    let mut at_x = evaluate(&mut ev, &x, spec.composite)?;
    let mut delta = config.delta0;
    let mut trace = Vec::new();
    if delta < config.delta_min {
        return Ok(ev.into_report(algo, &x, delta, at_x.f, TerminationReason::DeltaMin, trace));
    }
    let p = InterpolationSet::canonical(&x, 1.0, spec.basis)?.p() as u64;
    let per_iter = p; // p − 1 stencil points plus one trial point
    for k in 0..config.max_iters {
        if !ev.can_afford(per_iter) {
            return Ok(ev.into_report(algo, &x, delta, at_x.f, TerminationReason::MaxEvals, trace));
        }
        let x_k = x.as_slice().to_vec();
        let model = stencil_model(&mut ev, &x, &at_x, delta.max(spec.radius_floor), &spec)?;
        let norm_g = model.g.norm();
        let measure = if spec.second_order {
            let (lmin, _) = min_eigenpair(&model.h);
            Some(norm_g.max(-lmin).max(0.0))
        } else {
            None
        };
        let critical = measure.unwrap_or(norm_g);
        let (status, rho) = if critical < config.mu_c * delta {
            (IterStatus::CriticalitySkip, None)
        } else {
            let step = if spec.second_order {
                solve_trs_secondorder(&model.g, &model.h, delta)?
            } else {
                tr_step(&model.g, &model.h, delta)?
            };
            if step.predicted_decrease > 0.0 {
                let x_new = &x + &step.s;
                let trial = evaluate(&mut ev, &x_new, spec.composite)?;
                let rho = (at_x.f - trial.f + spec.ratio_shift) / step.predicted_decrease;
                let status = if two_way {
                    if rho >= config.eta_s {
                        IterStatus::Successful
                    } else {
                        IterStatus::Unsuccessful
                    }
                } else {
                    classify(Some(rho), config)
                };
                if matches!(status, IterStatus::VerySuccessful | IterStatus::Successful) {
                    x = x_new;
                    at_x = trial;
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
            measure,
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
            norm_g,
            certified: true,
            evals_used: ev.used(),
            evals_needed_next: per_iter,
        };
        delta = delta_next;
        if let Some(reason) = termination_check(&state, config) {
            return Ok(ev.into_report(algo, &x, delta, at_x.f, reason, trace));
        }
    }
    Ok(ev.into_report(algo, &x, delta, at_x.f, TerminationReason::IterationCap, trace))
}

/// Simple IBO trust-region method: a fully linear model on the canonical stencil every iteration.
///
/// `model_kind` is one of `Linear`, `MinFrobenius` or `Composite`.
pub fn run_ibo_first_order(
    oracle: &ObjectiveOracle,
    x0: &Vector,
    config: &TrConfig,
    model_kind: ModelKind,
) -> Result<SolveReport> {
    let (basis, composite) = match model_kind {
        ModelKind::Linear => (BasisKind::Linear, false),
        ModelKind::MinFrobenius => (BasisKind::MinFrobenius, false),
        ModelKind::Composite => (BasisKind::Linear, true),
        other => return Err(DfoError::config(format!("first-order driver does not support {other:?} models"))),
    };
    let spec = StencilSpec {
        algo: Algorithm::FirstOrder,
        basis,
        composite,
        second_order: false,
        radius_floor: 0.0,
        ratio_shift: 0.0,
    };
    run_stencil_loop(oracle, x0, config, spec)
}

/// Second-order IBO trust-region method with fully quadratic models on the structured stencil.
pub fn run_ibo_second_order(oracle: &ObjectiveOracle, x0: &Vector, config: &TrConfig) -> Result<SolveReport> {
    let spec = StencilSpec {
        algo: Algorithm::SecondOrder,
        basis: BasisKind::FullQuadratic,
        composite: false,
        second_order: true,
        radius_floor: 0.0,
        ratio_shift: 0.0,
    };
    run_stencil_loop(oracle, x0, config, spec)
}
