//! Trust-region driver loops and their shared bookkeeping.

mod classical;
mod constrained;
mod noisy;
mod persistent;
mod stencil;

pub use classical::run_classical_tr;
pub use constrained::{criticality_measure, run_convex_constrained, CRITICALITY_MAX_ITERS, CRITICALITY_TOL};
pub use noisy::{interpolation_radius_floor, run_noisy_deterministic, run_storm};
pub use persistent::{run_ibo_inaccurate, run_self_correcting};
pub use stencil::{run_ibo_first_order, run_ibo_second_order};

use serde::{Deserialize, Serialize};

use crate::error::{DfoError, Result};
use crate::linalg::{Matrix, Vector};
use crate::noise::{sample_average, SampleEstimate};
use crate::problem::{ObjectiveOracle, SampleStream};
use crate::trs::{cauchy_point, solve_trs_exact, TrsSolution, EXACT_TOL};

/// Parameters shared by all driver loops.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrConfig {
    pub gamma_dec: f64,
    pub gamma_inc: f64,
    pub eta_u: f64,
    pub eta_s: f64,
    pub mu_c: f64,
    pub delta0: f64,
    /// Radius cap of the second-order driver.
    pub delta_max: f64,
    pub delta_min: f64,
    pub max_evals: u64,
    pub max_iters: usize,
    /// Distant-point threshold as a multiple of Δ.
    pub beta: f64,
    /// Poisedness threshold for certification and bad-point replacement.
    pub lambda_threshold: f64,
    /// Certified-gradient stopping tolerance; zero disables it.
    pub grad_tol: f64,
    /// Acceptance tolerance of the deterministic-noise ratio test.
    pub noise_r: f64,
    /// Gradient Lipschitz estimate used for the noisy interpolation radius floor.
    pub lipschitz_estimate: f64,
    pub alpha_m: f64,
    pub alpha_f: f64,
    /// Estimate accuracy factor: estimates are within `storm_eps_f Δ²` with the required probability.
    pub storm_eps_f: f64,
    /// STORM radius cap exponent: `Δ_max = γ_inc^j_max Δ₀`.
    pub j_max: u32,
    pub seed: u64,
    /// Keep the list of evaluated points in the report.
    pub keep_eval_log: bool,
}

impl Default for TrConfig {
    fn default() -> Self {
        TrConfig {
            gamma_dec: 0.5,
            gamma_inc: 2.0,
            eta_u: 0.1,
            eta_s: 0.7,
            mu_c: 1.0,
            delta0: 1.0,
            delta_max: 100.0,
            delta_min: 1e-8,
            max_evals: 2000,
            max_iters: 100_000,
            beta: 2.0,
            lambda_threshold: 10.0,
            grad_tol: 1e-8,
            noise_r: 0.0,
            lipschitz_estimate: 1.0,
            alpha_m: 0.9,
            alpha_f: 0.9,
            storm_eps_f: 1.0,
            j_max: 10,
            seed: 0,
            keep_eval_log: true,
        }
    }
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(DfoError::config(msg()))
    }
}

impl TrConfig {
    /// Checks every range constraint on the parameters.
    pub fn validate(&self) -> Result<()> {
        let c = self;
        check(c.gamma_dec > 0.0 && c.gamma_dec < 1.0, || format!("gamma_dec must lie in (0,1), got {}", c.gamma_dec))?;
        check(c.gamma_inc > 1.0 && c.gamma_inc.is_finite(), || format!("gamma_inc must exceed 1, got {}", c.gamma_inc))?;
        check(c.eta_u > 0.0 && c.eta_u <= c.eta_s && c.eta_s < 1.0, || {
            format!("need 0 < eta_u <= eta_s < 1, got eta_u={} eta_s={}", c.eta_u, c.eta_s)
        })?;
        check(c.mu_c > 0.0 && c.mu_c.is_finite(), || format!("mu_c must be positive, got {}", c.mu_c))?;
        check(c.delta0 > 0.0 && c.delta0.is_finite(), || format!("delta0 must be positive, got {}", c.delta0))?;
        check(c.delta_max >= c.delta0, || format!("delta_max {} is below delta0 {}", c.delta_max, c.delta0))?;
        check(c.delta_min >= 0.0, || format!("delta_min must be nonnegative, got {}", c.delta_min))?;
        check(c.max_evals > 0, || "max_evals must be positive".into())?;
        check(c.max_iters > 0, || "max_iters must be positive".into())?;
        check(c.beta > 1.0, || format!("beta must exceed 1, got {}", c.beta))?;
        check(c.lambda_threshold > 1.0, || format!("lambda_threshold must exceed 1, got {}", c.lambda_threshold))?;
        check(c.grad_tol >= 0.0, || format!("grad_tol must be nonnegative, got {}", c.grad_tol))?;
        check(c.noise_r >= 0.0, || format!("noise_r must be nonnegative, got {}", c.noise_r))?;
        check(c.lipschitz_estimate > 0.0, || format!("lipschitz_estimate must be positive, got {}", c.lipschitz_estimate))?;
        for (name, a) in [("alpha_m", c.alpha_m), ("alpha_f", c.alpha_f)] {
            check(a > 0.5 && a <= 1.0, || format!("{name} must lie in (1/2, 1], got {a}"))?;
        }
        check(c.alpha_m * c.alpha_f > 0.5, || {
            format!("alpha_m * alpha_f must exceed 1/2, got {}", c.alpha_m * c.alpha_f)
        })?;
        check(c.storm_eps_f > 0.0, || format!("storm_eps_f must be positive, got {}", c.storm_eps_f))?;
        Ok(())
    }

    /// STORM radius cap `γ_inc^j_max Δ₀`.
    pub fn storm_delta_max(&self) -> f64 {
        self.gamma_inc.powi(self.j_max as i32) * self.delta0
    }
}

/// Driver variants, used to label reports and to check trace statuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Classical,
    FirstOrder,
    SecondOrder,
    Inaccurate,
    SelfCorrecting,
    ConvexConstrained,
    NoisyDeterministic,
    Storm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IterStatus {
    VerySuccessful,
    Successful,
    ModelImproving,
    ReplaceDistant,
    ReplaceBad,
    Unsuccessful,
    CriticalitySkip,
}

impl Algorithm {
    pub const ALL: [Algorithm; 8] = [
        Algorithm::Classical,
        Algorithm::FirstOrder,
        Algorithm::SecondOrder,
        Algorithm::Inaccurate,
        Algorithm::SelfCorrecting,
        Algorithm::ConvexConstrained,
        Algorithm::NoisyDeterministic,
        Algorithm::Storm,
    ];

    pub fn legal_statuses(self) -> &'static [IterStatus] {
        use IterStatus::*;
        match self {
            Algorithm::Classical => &[VerySuccessful, Successful, Unsuccessful],
            Algorithm::FirstOrder | Algorithm::SecondOrder | Algorithm::ConvexConstrained => {
                &[VerySuccessful, Successful, Unsuccessful, CriticalitySkip]
            }
            Algorithm::Inaccurate => &[VerySuccessful, Successful, ModelImproving, Unsuccessful],
            Algorithm::SelfCorrecting => &[VerySuccessful, Successful, ReplaceDistant, ReplaceBad, Unsuccessful],
            Algorithm::NoisyDeterministic | Algorithm::Storm => &[Successful, Unsuccessful, CriticalitySkip],
        }
    }

    /// Radius factor the update rule applies for `status`, before any cap.
    pub fn delta_factor(self, status: IterStatus, config: &TrConfig) -> f64 {
        use IterStatus::*;
        let dec = if self == Algorithm::Storm { 1.0 / config.gamma_inc } else { config.gamma_dec };
        match status {
            VerySuccessful => config.gamma_inc,
            Successful if matches!(self, Algorithm::NoisyDeterministic | Algorithm::Storm) => config.gamma_inc,
            Successful | ModelImproving | ReplaceDistant | ReplaceBad => 1.0,
            Unsuccessful | CriticalitySkip => dec,
        }
    }

    /// Radius cap, if the variant has one.
    pub fn delta_cap(self, config: &TrConfig) -> Option<f64> {
        match self {
            Algorithm::SecondOrder => Some(config.delta_max),
            Algorithm::Storm => Some(config.storm_delta_max()),
            _ => None,
        }
    }
}

/// One row of a driver trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    pub x: Vec<f64>,
    pub delta: f64,
    pub norm_g: f64,
    /// Second-order or constrained criticality measure where the variant uses one.
    pub measure: Option<f64>,
    pub rho: Option<f64>,
    pub status: IterStatus,
    /// Cumulative oracle calls (samples for STORM) at the end of the iteration.
    pub evals: u64,
    /// Best objective value observed so far.
    pub f_best: f64,
    pub certified: Option<bool>,
    /// Samples drawn in this iteration (STORM only).
    pub samples: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TerminationReason {
    DeltaMin,
    MaxEvals,
    GradientTolWithCertificate,
    IterationCap,
}

/// Outcome of a driver run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub algorithm: Algorithm,
    pub x: Vec<f64>,
    pub delta: f64,
    pub f_best: f64,
    /// Oracle value at the final iterate as used by the driver.
    pub f_final: f64,
    pub reason: TerminationReason,
    pub trace: Vec<IterationRecord>,
    pub evals: u64,
    /// Every point passed to the oracle, in call order (one entry per sample average in STORM).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub eval_log: Vec<Vec<f64>>,
}

impl SolveReport {
    pub fn x_vector(&self) -> Vector {
        Vector::from_column_slice(&self.x)
    }

    /// Whether every consecutive radius ratio matches the recorded status.
    pub fn delta_ratios_consistent(&self, config: &TrConfig) -> bool {
        let cap = self.algorithm.delta_cap(config);
        self.trace.iter().enumerate().all(|(i, rec)| {
            let next = self.trace.get(i + 1).map_or(self.delta, |r| r.delta);
            let mut expected = rec.delta * self.algorithm.delta_factor(rec.status, config);
            if let Some(c) = cap {
                expected = expected.min(c);
            }
            (next - expected).abs() <= 1e-12 * expected.abs().max(f64::MIN_POSITIVE)
        })
    }

    /// Whether every trace status is legal for the report's algorithm.
    pub fn statuses_legal(&self) -> bool {
        let legal = self.algorithm.legal_statuses();
        self.trace.iter().all(|r| legal.contains(&r.status))
    }
}

/// Inputs of [`termination_check`] at the end of an iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TerminationState {
    pub iteration: usize,
    pub delta: f64,
    pub delta_next: f64,
    pub norm_g: f64,
    pub certified: bool,
    pub evals_used: u64,
    /// Evaluations the next iteration needs before it can produce a step.
    pub evals_needed_next: u64,
}

/// Stopping rule applied after every iteration.
pub fn termination_check(state: &TerminationState, config: &TrConfig) -> Option<TerminationReason> {
    if state.certified
        && config.grad_tol > 0.0
        && state.norm_g <= config.grad_tol
        && state.norm_g >= config.mu_c * state.delta
    {
        return Some(TerminationReason::GradientTolWithCertificate);
    }
    if state.delta_next < config.delta_min {
        return Some(TerminationReason::DeltaMin);
    }
    if state.evals_used + state.evals_needed_next > config.max_evals {
        return Some(TerminationReason::MaxEvals);
    }
    if state.iteration + 1 >= config.max_iters {
        return Some(TerminationReason::IterationCap);
    }
    None
}

/// Classifies a ratio with the three-way rule; `None` (no valid ratio) is a rejection.
pub(crate) fn classify(rho: Option<f64>, config: &TrConfig) -> IterStatus {
    match rho {
        Some(r) if r >= config.eta_s => IterStatus::VerySuccessful,
        Some(r) if r >= config.eta_u => IterStatus::Successful,
        _ => IterStatus::Unsuccessful,
    }
}

/// Trust-region step: the Cauchy point for linear models, otherwise the exact solution.
pub(crate) fn tr_step(g: &Vector, h: &Matrix, delta: f64) -> Result<TrsSolution> {
    if h.iter().all(|v| *v == 0.0) {
        return cauchy_point(g, h, delta);
    }
    match solve_trs_exact(g, h, delta, EXACT_TOL) {
        Ok(s) => Ok(s),
        Err(_) => cauchy_point(g, h, delta),
    }
}

/// Oracle access with budget accounting, best-value tracking and an evaluation log.
pub(crate) struct Evaluator<'a> {
    oracle: &'a ObjectiveOracle,
    start: u64,
    max_evals: u64,
    keep_log: bool,
    pub log: Vec<Vec<f64>>,
    pub f_best: f64,
}

impl<'a> Evaluator<'a> {
    pub fn new(oracle: &'a ObjectiveOracle, config: &TrConfig) -> Self {
        Evaluator {
            oracle,
            start: oracle.evaluations(),
            max_evals: config.max_evals,
            keep_log: config.keep_eval_log,
            log: Vec::new(),
            f_best: f64::INFINITY,
        }
    }

    pub fn used(&self) -> u64 {
        self.oracle.evaluations() - self.start
    }

    pub fn can_afford(&self, k: u64) -> bool {
        self.used() + k <= self.max_evals
    }

    fn note(&mut self, x: &Vector, f: f64) {
        if self.keep_log {
            self.log.push(x.as_slice().to_vec());
        }
        self.f_best = self.f_best.min(f);
    }

    pub fn eval(&mut self, x: &Vector) -> Result<f64> {
        let f = self.oracle.evaluate(x)?;
        self.note(x, f);
        Ok(f)
    }

    pub fn residuals(&mut self, x: &Vector) -> Result<Vector> {
        let r = self.oracle.residuals(x)?;
        self.note(x, 0.5 * r.norm_squared());
        Ok(r)
    }

    pub fn average(&mut self, x: &Vector, n: u64, stream: &mut SampleStream) -> Result<SampleEstimate> {
        let est = sample_average(self.oracle, x, n, stream)?;
        self.note(x, est.mean);
        Ok(est)
    }

    pub fn into_report(
        self,
        algorithm: Algorithm,
        x: &Vector,
        delta: f64,
        f_final: f64,
        reason: TerminationReason,
        trace: Vec<IterationRecord>,
    ) -> SolveReport {
        SolveReport {
            algorithm,
            x: x.as_slice().to_vec(),
            delta,
            f_best: self.f_best,
            f_final,
            reason,
            trace,
            evals: self.used(),
            eval_log: self.log,
        }
    }
}

/// Applies the radius update of `algorithm` for `status`.
pub(crate) fn next_delta(algorithm: Algorithm, status: IterStatus, delta: f64, config: &TrConfig) -> f64 {
    let d = delta * algorithm.delta_factor(status, config);
    match algorithm.delta_cap(config) {
        Some(c) => d.min(c),
        None => d,
    }
}

pub(crate) fn start_checks(config: &TrConfig, oracle: &ObjectiveOracle, x0: &Vector) -> Result<()> {
    config.validate()?;
    crate::linalg::ensure_dim(x0, oracle.dimension())?;
    crate::linalg::ensure_finite_vec(x0, "starting point")
}
