use serde::{Deserialize, Serialize};

use crate::error::{DfoError, Result};
use crate::linalg::{determinant, Vector};
use crate::model::{assemble_matrix, BasisKind, InterpolationSet};
use crate::problem::FeasibleSet;

use super::lagrange::{lagrange_basis, LagrangeBasis};
use super::poisedness::{constrained_maximizer, estimate_poisedness, feasible_samples, PoisednessReport};

/// Swap limit of [`improve_geometry`].
pub const MAX_SWAPS: usize = 100;
/// Relative slack of the per-swap determinant check.
pub const DET_CHECK_SLACK: f64 = 1e-6;
/// Smallest accepted `|ℓᵢ(y)|` for a feasible replacement.
pub const MIN_REPLACEMENT_VALUE: f64 = 1e-10;

/// One point replacement performed by the improvement loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwapRecord {
    pub index: usize,
    pub old: Vec<f64>,
    pub new: Vec<f64>,
    /// `ℓᵢ(y_new)` before the swap.
    pub lagrange_value: f64,
    /// `|det A_new| / |det A_old|`.
    pub det_ratio: f64,
}

#[derive(Debug, Clone)]
pub struct ImprovedGeometry {
    pub basis: LagrangeBasis,
    pub swaps: Vec<SwapRecord>,
    /// Poisedness of the final set.
    pub report: PoisednessReport,
}

impl ImprovedGeometry {
    pub fn set(&self) -> &InterpolationSet {
        &self.basis.set
    }
}

/// `|det A_new| / |det A|` after replacing point `i` by `y`.
pub fn det_update_check(basis: &LagrangeBasis, i: usize, y: &Vector) -> Result<f64> {
    let det_old = basis
        .system
        .determinant
        .ok_or_else(|| DfoError::config("determinant updates need a square interpolation system"))?;
    let new_set = basis.set.with_point(i, y.clone())?;
    Ok((determinant(&assemble_matrix(&new_set)) / det_old).abs())
}

/// Verifies the determinant growth law for a swap and returns the measured ratio.
fn checked_ratio(basis: &LagrangeBasis, i: usize, y: &Vector, ell: f64) -> Result<f64> {
    let ratio = det_update_check(basis, i, y)?;
    let ok = match basis.set.kind() {
        BasisKind::MinFrobenius => ratio >= ell * ell * (1.0 - DET_CHECK_SLACK),
        _ => (ratio - ell.abs()).abs() <= DET_CHECK_SLACK * ell.abs().max(1.0),
    };
    if ok {
        Ok(ratio)
    } else {
        let bound = match basis.set.kind() {
            BasisKind::MinFrobenius => ell * ell,
            _ => ell.abs(),
        };
        Err(DfoError::DeterminantCheck { ratio, bound })
    }
}

/// Greedy swaps until every non-protected Lagrange polynomial is bounded by `target` on the ball.
///
/// In constrained mode the ball has radius `min(Δ, 1)` and is intersected with the feasible set.
pub fn improve_geometry(
    basis: LagrangeBasis,
    x: &Vector,
    delta: f64,
    target: f64,
    constrained: Option<&FeasibleSet>,
    protected: Option<usize>,
) -> Result<ImprovedGeometry> {
    if !(target > 1.0) {
        return Err(DfoError::config(format!("poisedness target must exceed 1, got {target}")));
    }
    if basis.set.kind() == BasisKind::Regression {
        return Err(DfoError::config("geometry improvement is not defined for regression sets"));
    }
    let mut basis = basis;
    let mut swaps = Vec::new();
    loop {
        let report = estimate_poisedness(&basis, x, delta, constrained)?;
        let Some((i, value)) = report.max_excluding(protected) else {
            return Ok(ImprovedGeometry { basis, swaps, report });
        };
        if value <= target {
            return Ok(ImprovedGeometry { basis, swaps, report });
        }
        if swaps.len() >= MAX_SWAPS {
            return Err(DfoError::IterationCap { cap: MAX_SWAPS });
        }
        let y = report.witness_of(i);
        let ell = basis.value(i, &y);
        let det_ratio = checked_ratio(&basis, i, &y, ell)?;
        swaps.push(SwapRecord {
            index: i,
            old: basis.set.point(i).as_slice().to_vec(),
            new: y.as_slice().to_vec(),
            lagrange_value: ell,
            det_ratio,
        });
        basis = lagrange_basis(&basis.set.with_point(i, y)?)?;
    }
}

/// Replaces point `i` of the basis set by `y`, checking the determinant growth law.
pub fn swap_point(basis: &LagrangeBasis, i: usize, y: Vector) -> Result<(LagrangeBasis, SwapRecord)> {
    let ell = basis.value(i, &y);
    let det_ratio = checked_ratio(basis, i, &y, ell)?;
    let record = SwapRecord {
        index: i,
        old: basis.set.point(i).as_slice().to_vec(),
        new: y.as_slice().to_vec(),
        lagrange_value: ell,
        det_ratio,
    };
    Ok((lagrange_basis(&basis.set.with_point(i, y)?)?, record))
}

/// Canonical stencil of radius `min(Δ, 1)` with infeasible points replaced by feasible
/// maximizers of their Lagrange polynomials.
pub fn init_feasible_set(
    x: &Vector,
    delta: f64,
    kind: BasisKind,
    constrained: &FeasibleSet,
) -> Result<InterpolationSet> {
    if !constrained.contains(x) {
        return Err(DfoError::InfeasibleStart);
    }
    let r = delta.min(1.0);
    let mut set = InterpolationSet::canonical(x, r, kind)?;
    let infeasible: Vec<usize> = (0..set.p()).filter(|&i| !constrained.contains(set.point(i))).collect();
    if infeasible.is_empty() {
        return Ok(set);
    }
    let samples = feasible_samples(constrained, x, r);
    for i in infeasible {
        let basis = lagrange_basis(&set)?;
        let (y, v) = constrained_maximizer(&basis, i, constrained, x, r, &samples)?;
        if v < MIN_REPLACEMENT_VALUE {
            return Err(DfoError::NoFeasibleReplacement { index: i });
        }
        set = set.with_point(i, y)?;
    }
    Ok(set)
}
