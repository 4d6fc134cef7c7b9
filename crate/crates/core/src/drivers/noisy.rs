//! Drivers for noisy oracles: bounded deterministic noise and stochastic sampling.

use crate::error::{DfoError, Result};
use crate::linalg::Vector;
use crate::model::{fully_linear_constants, BasisKind, InterpSystem, InterpolationSet};
use crate::noise::{required_samples, stream_for, MAX_SAMPLES};
use crate::problem::{NoiseMode, ObjectiveOracle};

use super::stencil::{run_stencil_loop, StencilSpec};
use super::{
    next_delta, start_checks, termination_check, tr_step, Algorithm, Evaluator, IterStatus, IterationRecord,
    SolveReport, TerminationReason, TerminationState, TrConfig,
};

/// Smallest stencil radius for noise level `eps_f`: `√(κ̃_mg ε_f / κ_mg)` with the constants of
/// the canonical linear stencil in dimension `n`.
pub fn interpolation_radius_floor(n: usize, eps_f: f64, lipschitz_grad: f64) -> Result<f64> {
    if !(eps_f >= 0.0 && eps_f.is_finite()) {
        return Err(DfoError::config(format!("eps_f must be finite and nonnegative, got {eps_f}")));
    }
    if !(lipschitz_grad > 0.0 && lipschitz_grad.is_finite()) {
        return Err(DfoError::config(format!("Lipschitz estimate must be positive, got {lipschitz_grad}")));
    }
    let set = InterpolationSet::canonical(&Vector::zeros(n), 1.0, BasisKind::Linear)?;
    let system = InterpSystem::assemble(&set)?;
    let c = fully_linear_constants(&set, &system, lipschitz_grad)?;
    Ok((c.kappa_mg_noise * eps_f / c.kappa_mg).sqrt())
}

/// IBO method for an oracle with bounded deterministic noise.
///
/// Accepts a step when `(f̃(x) − f̃(x+s) + r) / pred ≥ η_S` with `r = config.noise_r ≥ 2ε_f`,
/// and never builds a stencil smaller than [`interpolation_radius_floor`].
pub fn run_noisy_deterministic(oracle: &ObjectiveOracle, x0: &Vector, config: &TrConfig) -> Result<SolveReport> {
    let eps_f = match oracle.mode() {
        NoiseMode::Exact => 0.0,
        NoiseMode::BoundedDeterministic { eps_f, .. } => eps_f,
        NoiseMode::Stochastic { .. } => {
            return Err(DfoError::config("the deterministic-noise driver needs a deterministic oracle"))
        }
    };
    if config.noise_r < 2.0 * eps_f {
        return Err(DfoError::config(format!(
            "noise_r = {} must be at least 2 eps_f = {}",
            config.noise_r,
            2.0 * eps_f
        )));
    }
    let spec = StencilSpec {
        algo: Algorithm::NoisyDeterministic,
        basis: BasisKind::Linear,
        composite: false,
        second_order: false,
        radius_floor: interpolation_radius_floor(x0.len(), eps_f, config.lipschitz_estimate)?,
        ratio_shift: config.noise_r,
    };
    run_stencil_loop(oracle, x0, config, spec)
}

/// Per-estimate sample counts `(N_m, N_f)` at radius `delta`.
fn sample_counts(sigma: f64, config: &TrConfig, p: usize, delta: f64) -> Result<(u64, u64)> {
    let count = |alpha: f64| -> Result<u64> {
        if alpha >= 1.0 {
            Ok(if sigma == 0.0 { 1 } else { MAX_SAMPLES })
        } else {
            required_samples(sigma, config.storm_eps_f, alpha, delta)
        }
    };
    Ok((count(config.alpha_m.powf(1.0 / p as f64))?, count(config.alpha_f.sqrt())?))
}

/// Stochastic IBO trust-region method with sample-averaged model values and ratio estimates.
///
/// The budget `config.max_evals` counts individual samples.
pub fn run_storm(oracle: &ObjectiveOracle, x0: &Vector, config: &TrConfig) -> Result<SolveReport> {
    start_checks(config, oracle, x0)?;
    let NoiseMode::Stochastic { sigma } = oracle.mode() else {
        return Err(DfoError::config("STORM needs a stochastic oracle"));
    };
    let algo = Algorithm::Storm;
    let n = x0.len();
    let p = n + 1;
    let mut ev = Evaluator::new(oracle, config);
    let mut counter = 0u64;
    let mut next_stream = || {
        counter += 1;
        stream_for(config.seed, counter - 1)
    };
    let mut x = x0.clone();
    let mut delta = config.delta0;
    let mut trace = Vec::new();
    if delta < config.delta_min {
        let f0 = ev.average(&x, 1, &mut next_stream())?.mean;
        return Ok(ev.into_report(algo, &x, delta, f0, TerminationReason::DeltaMin, trace));
    }
    let mut f_x = f64::NAN;
    for k in 0..config.max_iters {
        let (n_m, n_f) = sample_counts(sigma, config, p, delta)?;
        if !ev.can_afford(p as u64 * n_m + 2 * n_f) {
            return Ok(ev.into_report(algo, &x, delta, f_x, TerminationReason::MaxEvals, trace));
        }
        let start = ev.used();
        let x_k = x.as_slice().to_vec();
        let set = InterpolationSet::canonical(&x, delta, BasisKind::Linear)?;
        let mut fvals = Vector::zeros(p);
        for (i, y) in set.points().iter().enumerate() {
            fvals[i] = ev.average(y, n_m, &mut next_stream())?.mean;
        }
        if f_x.is_nan() {
            f_x = fvals[0];
        }
        let model = InterpSystem::assemble(&set)?.model(&set, &fvals, None)?;
        let norm_g = model.g.norm();
        let (status, rho) = if norm_g < config.mu_c * delta {
            (IterStatus::CriticalitySkip, None)
        } else {
            let step = tr_step(&model.g, &model.h, delta)?;
            if step.predicted_decrease > 0.0 {
                let x_new = &x + &step.s;
                let f0 = ev.average(&x, n_f, &mut next_stream())?.mean;
                let fs = ev.average(&x_new, n_f, &mut next_stream())?.mean;
                let rho = (f0 - fs) / step.predicted_decrease;
                if rho >= config.eta_s {
                    x = x_new;
                    f_x = fs;
                    (IterStatus::Successful, Some(rho))
                } else {
                    f_x = f0;
                    (IterStatus::Unsuccessful, Some(rho))
                }
            } else {
                (IterStatus::Unsuccessful, None)
            }
        };
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
            certified: Some(false),
            samples: Some(ev.used() - start),
        });
        let delta_next = next_delta(algo, status, delta, config);
        let (m_next, f_next) = sample_counts(sigma, config, p, delta_next.max(f64::MIN_POSITIVE))?;
        let state = TerminationState {
            iteration: k,
            delta,
            delta_next,
            norm_g,
            certified: false,
            evals_used: ev.used(),
            evals_needed_next: (p as u64 * m_next).saturating_add(2 * f_next),
        };
        delta = delta_next;
        if let Some(reason) = termination_check(&state, config) {
            return Ok(ev.into_report(algo, &x, delta, f_x, reason, trace));
        }
    }
    Ok(ev.into_report(algo, &x, delta, f_x, TerminationReason::IterationCap, trace))
}
