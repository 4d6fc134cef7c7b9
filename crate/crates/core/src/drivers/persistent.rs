//! Drivers that carry one interpolation set across iterations and repair it on demand.

use crate::error::{DfoError, Result};
use crate::geometry::{
    ball_witnesses, estimate_poisedness, improve_geometry, lagrange_basis, swap_point, LagrangeBasis,
    PoisednessReport, MIN_REPLACEMENT_VALUE,
};
use crate::linalg::{Matrix, Vector};
use crate::model::{BasisKind, InterpolationSet, ModelKind, QuadraticModel};
use crate::problem::ObjectiveOracle;

use super::{
    classify, next_delta, start_checks, termination_check, tr_step, Algorithm, Evaluator, IterStatus,
    IterationRecord, SolveReport, TerminationReason, TerminationState, TrConfig,
};

/// Interpolation set, its Lagrange basis and the objective values at its points.
struct PersistentSet {
    basis: LagrangeBasis,
    fvals: Vec<f64>,
    /// Hessian carried by the minimum-change variant.
    h_prev: Option<Matrix>,
}

impl PersistentSet {
    /// Canonical stencil around `x`, reusing the cached `f(x)`.
    fn canonical(ev: &mut Evaluator, x: &Vector, fx: f64, delta: f64, kind: BasisKind) -> Result<Self> {
        let set = InterpolationSet::canonical(x, delta, kind)?;
        let mut fvals = vec![fx];
        for y in &set.points()[1..] {
            fvals.push(ev.eval(y)?);
        }
        Ok(PersistentSet { basis: lagrange_basis(&set)?, fvals, h_prev: None })
    }

    fn p(&self) -> usize {
        self.fvals.len()
    }

    fn set(&self) -> &InterpolationSet {
        &self.basis.set
    }

    /// Re-expresses the set around `(x, Δ)`; falls back to a fresh stencil if that system is too ill-conditioned.
    fn rebase(&mut self, ev: &mut Evaluator, x: &Vector, fx: f64, delta: f64) -> Result<()> {
        let set = self.set().rebased(x.clone(), delta)?;
        match lagrange_basis(&set) {
            Ok(basis) => {
                self.basis = basis;
                Ok(())
            }
            Err(DfoError::SingularSystem { .. }) => {
                log::debug!("interpolation set ill-conditioned at radius {delta:e}; rebuilding the stencil");
                let h_prev = self.h_prev.take();
                *self = PersistentSet::canonical(ev, x, fx, delta, self.set().kind())?;
                self.h_prev = h_prev;
                Ok(())
            }
            Err(e) => Err(e),
        }
    }

    fn model(&self) -> Result<QuadraticModel> {
        let f = Vector::from_column_slice(&self.fvals);
        self.basis.system.model(self.set(), &f, self.h_prev.as_ref())
    }

    fn base_index(&self) -> Option<usize> {
        self.set().base_index()
    }

    /// Farthest point from `x` strictly beyond `radius`.
    fn farthest_beyond(&self, x: &Vector, radius: f64) -> Option<usize> {
        let pts = self.set().points();
        (0..pts.len())
            .map(|i| (i, (&pts[i] - x).norm()))
            .filter(|&(_, d)| d > radius)
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(i, _)| i)
    }

    fn distant_points(&self, x: &Vector, radius: f64) -> Vec<usize> {
        (0..self.p()).filter(|&i| (self.set().point(i) - x).norm() > radius).collect()
    }

    /// Maximizer of `|ℓᵢ|` over `B(x, Δ)`.
    fn ball_maximizer(&self, i: usize, x: &Vector, delta: f64) -> Result<Vector> {
        let [a, b] = ball_witnesses(&self.basis, i, x, delta)?;
        let (va, vb) = (self.basis.value(i, &a).abs(), self.basis.value(i, &b).abs());
        let (y, v) = if va >= vb { (a, va) } else { (b, vb) };
        if v <= MIN_REPLACEMENT_VALUE {
            return Err(DfoError::NoFeasibleReplacement { index: i });
        }
        Ok(y)
    }

    fn replace(&mut self, i: usize, y: Vector, fy: f64) -> Result<()> {
        let (basis, _) = swap_point(&self.basis, i, y)?;
        self.basis = basis;
        self.fvals[i] = fy;
        Ok(())
    }

    /// Inserts an accepted iterate in place of the point maximizing `‖yᵢ − x₊‖² |ℓᵢ(x₊)|`.
    fn insert_iterate(&mut self, x_new: &Vector, f_new: f64) -> Result<()> {
        let lam = self.basis.lambda_at(x_new);
        let mut order: Vec<(usize, f64)> = (0..self.p())
            .filter(|&i| lam[i].abs() > MIN_REPLACEMENT_VALUE)
            .map(|i| (i, (self.set().point(i) - x_new).norm_squared() * lam[i].abs()))
            .collect();
        order.sort_by(|a, b| b.1.total_cmp(&a.1));
        let mut last_err = DfoError::NoFeasibleReplacement { index: 0 };
        for (i, _) in order {
            match self.replace(i, x_new.clone(), f_new) {
                Ok(()) => return Ok(()),
                Err(e @ DfoError::DeterminantCheck { .. }) => last_err = e,
                Err(e) => return Err(e),
            }
        }
        Err(last_err)
    }

    /// `(all points within βΔ) ∧ (non-base Λ∞ ≤ threshold)` for the set based at `x`.
    fn certification(&self, x: &Vector, delta: f64, config: &TrConfig) -> Result<(bool, PoisednessReport)> {
        let report = estimate_poisedness(&self.basis, x, delta, None)?;
        let close = self.farthest_beyond(x, config.beta * delta).is_none();
        let poised = report
            .max_excluding(self.base_index())
            .is_none_or(|(_, v)| v <= config.lambda_threshold);
        Ok((close && poised, report))
    }

    /// Replaces distant points, then improves geometry until certified. Returns `false` when the
    /// budget ran out first.
    fn make_fully_linear(&mut self, ev: &mut Evaluator, x: &Vector, delta: f64, config: &TrConfig) -> Result<bool> {
        for i in self.distant_points(x, config.beta * delta) {
            if !ev.can_afford(1) {
                return Ok(false);
            }
            let y = self.ball_maximizer(i, x, delta)?;
            let fy = ev.eval(&y)?;
            self.replace(i, y, fy)?;
        }
        let improved =
            improve_geometry(self.basis.clone(), x, delta, config.lambda_threshold, None, self.base_index())?;
        let changed: Vec<usize> =
            (0..self.p()).filter(|&i| improved.set().point(i) != self.set().point(i)).collect();
        if !ev.can_afford(changed.len() as u64) {
            return Ok(false);
        }
        for &i in &changed {
            self.fvals[i] = ev.eval(improved.set().point(i))?;
        }
        self.basis = improved.basis;
        Ok(true)
    }
}

fn persistent_basis(model_kind: ModelKind, allowed: &[ModelKind]) -> Result<BasisKind> {
    if !allowed.contains(&model_kind) {
        return Err(DfoError::config(format!("persistent-set drivers do not support {model_kind:?} models")));
    }
    Ok(match model_kind {
        ModelKind::MinFrobenius | ModelKind::MinChangeFrobenius => BasisKind::MinFrobenius,
        _ => BasisKind::Linear,
    })
}

#[derive(Clone, Copy, PartialEq)]
enum Variant {
    Inaccurate,
    SelfCorrecting,
}

fn run_persistent(
    oracle: &ObjectiveOracle,
    x0: &Vector,
    config: &TrConfig,
    basis_kind: BasisKind,
    min_change: bool,
    variant: Variant,
) -> Result<SolveReport> {
    start_checks(config, oracle, x0)?;
    let algo = match variant {
        Variant::Inaccurate => Algorithm::Inaccurate,
        Variant::SelfCorrecting => Algorithm::SelfCorrecting,
    };
    let mut ev = Evaluator::new(oracle, config);
    let mut x = x0.clone();
    let mut fx = ev.eval(&x)?;
    let mut delta = config.delta0;
    let mut trace = Vec::new();
    if delta < config.delta_min {
        return Ok(ev.into_report(algo, &x, delta, fx, TerminationReason::DeltaMin, trace));
    }
    let p = InterpolationSet::canonical(&x, 1.0, basis_kind)?.p() as u64;
    if !ev.can_afford(p) {
        return Ok(ev.into_report(algo, &x, delta, fx, TerminationReason::MaxEvals, trace));
    }
    let mut ys = PersistentSet::canonical(&mut ev, &x, fx, delta, basis_kind)?;

    for k in 0..config.max_iters {
        if !ev.can_afford(1) {
            return Ok(ev.into_report(algo, &x, delta, fx, TerminationReason::MaxEvals, trace));
        }
        let x_k = x.as_slice().to_vec();
        ys.rebase(&mut ev, &x, fx, delta)?;
        let model = ys.model()?;
        let norm_g = model.g.norm();
        let (certified, report) = ys.certification(&x, delta, config)?;

        let step = tr_step(&model.g, &model.h, delta)?;
        let trial = if step.predicted_decrease > 0.0 {
            let x_new = &x + &step.s;
            let f_new = ev.eval(&x_new)?;
            Some((x_new, f_new, (fx - f_new) / step.predicted_decrease))
        } else {
            None
        };
        let rho = trial.as_ref().map(|t| t.2);
        let ratio_status = classify(rho, config);
        let accepted = match variant {
            Variant::Inaccurate => ratio_status != IterStatus::Unsuccessful,
            Variant::SelfCorrecting => ratio_status != IterStatus::Unsuccessful && norm_g >= config.mu_c * delta,
        };

        let mut out_of_budget = false;
        let status = if accepted {
            let (x_new, f_new, _) = trial.expect("accepted step has a trial point");
            ys.insert_iterate(&x_new, f_new)?;
            x = x_new;
            fx = f_new;
            ratio_status
        } else {
            match variant {
                Variant::Inaccurate if !certified => {
                    out_of_budget = !ys.make_fully_linear(&mut ev, &x, delta, config)?;
                    IterStatus::ModelImproving
                }
                Variant::Inaccurate => IterStatus::Unsuccessful,
                Variant::SelfCorrecting => {
                    if let Some(i) = ys.farthest_beyond(&x, config.beta * delta) {
                        if ev.can_afford(1) {
                            let y = ys.ball_maximizer(i, &x, delta)?;
                            let fy = ev.eval(&y)?;
                            ys.replace(i, y, fy)?;
                        } else {
                            out_of_budget = true;
                        }
                        IterStatus::ReplaceDistant
                    } else if let Some((i, _)) =
                        report.max_excluding(ys.base_index()).filter(|&(_, v)| v > config.lambda_threshold)
                    {
                        if ev.can_afford(1) {
                            let y = report.witness_of(i);
                            let fy = ev.eval(&y)?;
                            ys.replace(i, y, fy)?;
                        } else {
                            out_of_budget = true;
                        }
                        IterStatus::ReplaceBad
                    } else {
                        IterStatus::Unsuccessful
                    }
                }
            }
        };

        if min_change {
            ys.h_prev = (status != IterStatus::Unsuccessful).then(|| model.h.clone());
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
            certified: Some(certified),
            samples: None,
        });
        if out_of_budget {
            return Ok(ev.into_report(algo, &x, delta, fx, TerminationReason::MaxEvals, trace));
        }
        let delta_next = next_delta(algo, status, delta, config);
        let state = TerminationState {
            iteration: k,
            delta,
            delta_next,
            norm_g,
            certified,
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

/// IBO method with possibly inaccurate models on a persistent linear interpolation set.
///
/// A rejected step with an uncertified model triggers a model-improving iteration that leaves
/// `x` and `Δ` unchanged; only rejections with a certified model shrink the radius.
pub fn run_ibo_inaccurate(oracle: &ObjectiveOracle, x0: &Vector, config: &TrConfig) -> Result<SolveReport> {
    run_persistent(oracle, x0, config, BasisKind::Linear, false, Variant::Inaccurate)
}

/// Self-correcting method: on rejection it replaces one distant point, else one badly poised
/// point, and shrinks the radius only when neither exists.
///
/// `model_kind` is `Linear`, `MinFrobenius` or `MinChangeFrobenius`; the last carries the model
/// Hessian between iterations and drops it after an unsuccessful iteration.
pub fn run_self_correcting(
    oracle: &ObjectiveOracle,
    x0: &Vector,
    config: &TrConfig,
    model_kind: ModelKind,
) -> Result<SolveReport> {
    let basis = persistent_basis(
        model_kind,
        &[ModelKind::Linear, ModelKind::MinFrobenius, ModelKind::MinChangeFrobenius],
    )?;
    let min_change = model_kind == ModelKind::MinChangeFrobenius;
    run_persistent(oracle, x0, config, basis, min_change, Variant::SelfCorrecting)
}
