use dfokit::drivers::{
    run_classical_tr, run_convex_constrained, run_ibo_first_order, run_ibo_inaccurate, run_ibo_second_order,
    run_noisy_deterministic, run_self_correcting, run_storm, Algorithm, SolveReport, TerminationReason, TrConfig,
};
use dfokit::model::{fully_linear_constants, BasisKind, InterpSystem, InterpolationSet};
use dfokit::problem::{lookup, make_noisy_oracle, NoiseMode, ObjectiveOracle, ProblemSpec};
use dfokit::trs::KAPPA_S;

use crate::config::{ModelChoice, RunConfig};
use crate::error::{BenchError, Result};
use crate::report::RunReport;

/// Runs the configured driver on the configured problem.
pub fn execute(config: &RunConfig) -> Result<RunReport> {
    let spec = lookup(&config.problem).map_err(|e| BenchError::config(e.to_string()))?;
    let exact = spec.oracle();
    let oracle: ObjectiveOracle = match (config.noise_sigma, config.noise_epsf) {
        (Some(sigma), _) => make_noisy_oracle(&exact, NoiseMode::Stochastic { sigma })?,
        (None, Some(eps_f)) => {
            make_noisy_oracle(&exact, NoiseMode::BoundedDeterministic { eps_f, phase: config.seed() })?
        }
        (None, None) => exact,
    };
    let tr = &config.tr;
    let x0 = &spec.x0;
    let model = config.model.unwrap_or(ModelChoice::Linear).kind();
    let solve: SolveReport = match config.algo {
        Algorithm::Classical => {
            let grad = spec.gradient.clone().ok_or_else(|| BenchError::config("classical needs a gradient"))?;
            match spec.hessian.clone() {
                Some(h) => run_classical_tr(&oracle, &*grad, Some(&*h), x0, tr)?,
                None => run_classical_tr(&oracle, &*grad, None, x0, tr)?,
            }
        }
        Algorithm::FirstOrder => run_ibo_first_order(&oracle, x0, tr, model)?,
        Algorithm::SecondOrder => run_ibo_second_order(&oracle, x0, tr)?,
        Algorithm::Inaccurate => run_ibo_inaccurate(&oracle, x0, tr)?,
        Algorithm::SelfCorrecting => run_self_correcting(&oracle, x0, tr, model)?,
        Algorithm::ConvexConstrained => run_convex_constrained(&oracle, &spec.feasible, x0, tr)?,
        Algorithm::NoisyDeterministic => run_noisy_deterministic(&oracle, x0, tr)?,
        Algorithm::Storm => run_storm(&oracle, x0, tr)?,
    };
    let norm_grad = spec.grad(&solve.x_vector()).map(|g| g.norm());
    let bound = match (config.algo, config.model, solve.reason) {
        (Algorithm::FirstOrder, Some(ModelChoice::Linear), TerminationReason::DeltaMin) => {
            termination_bound(&spec, &solve, tr)?
        }
        _ => None,
    };
    Ok(RunReport::new(config, &solve, norm_grad, bound))
}

/// Bound on `‖∇f‖` at the first iterate whose radius drops below `delta_min`, for the linear stencil driver.
/// The stencil driver uses a zero model Hessian, so the Hessian bound is 1.
pub fn termination_bound(spec: &ProblemSpec, solve: &SolveReport, tr: &TrConfig) -> Result<Option<f64>> {
    let Some(lipschitz) = spec.lipschitz_grad else { return Ok(None) };
    let set = InterpolationSet::canonical(&solve.x_vector(), tr.delta_min, BasisKind::Linear)?;
    let system = InterpSystem::assemble(&set)?;
    let k = fully_linear_constants(&set, &system, lipschitz)?;
    let kappa_h = 1.0;
    let step = (2.0 * k.kappa_mf / (KAPPA_S * (1.0 - tr.eta_s))).max(kappa_h).max(tr.mu_c);
    Ok(Some((step + k.kappa_mg) * tr.delta_min / tr.gamma_dec))
}
