use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::Vector;
use crate::problem::FeasibleSet;
use crate::trs::{solve_trs_exact, EXACT_TOL};

use super::lagrange::LagrangeBasis;
use super::sampling::{ball_samples, project_feasible_ball, SAMPLE_COUNT};

/// Estimated poisedness constants of a set over `B(x, radius)` (intersected with `C` when constrained).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoisednessReport {
    /// `max_i max_y |ℓᵢ(y)|`.
    pub lambda_inf: f64,
    /// `max_y ‖λ(y)‖₁` over the candidate points; a lower bound on the true value.
    pub lambda_one: f64,
    pub witness: Vec<f64>,
    pub index: usize,
    /// Per-polynomial maxima of `|ℓᵢ|`.
    pub per_point: Vec<f64>,
    pub per_point_witness: Vec<Vec<f64>>,
    /// Radius of the ball that was searched.
    pub radius: f64,
    /// Number of feasible low-discrepancy samples that entered the candidate set.
    pub sample_size: usize,
}

impl PoisednessReport {
    /// Largest per-point maximum over indices other than `excluded`.
    pub fn max_excluding(&self, excluded: Option<usize>) -> Option<(usize, f64)> {
        self.per_point
            .iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != excluded)
            .fold(None, |acc, (i, &v)| match acc {
                Some((_, best)) if best >= v => acc,
                _ => Some((i, v)),
            })
    }

    pub fn witness_of(&self, i: usize) -> Vector {
        Vector::from_column_slice(&self.per_point_witness[i])
    }
}

/// Maximizers of `ℓᵢ` and `−ℓᵢ` over `B(x, r)` from two exact trust-region solves.
pub(crate) fn ball_witnesses(basis: &LagrangeBasis, i: usize, x: &Vector, r: f64) -> Result<[Vector; 2]> {
    let poly = basis.polys[i].recentered(x);
    let up = solve_trs_exact(&(-&poly.g), &(-&poly.h), r, EXACT_TOL)?;
    let down = solve_trs_exact(&poly.g, &poly.h, r, EXACT_TOL)?;
    Ok([x + up.s, x + down.s])
}

/// Projected-gradient ascent of `sign · ℓᵢ` over `C ∩ B(x, r)` from a feasible start.
fn ascend(
    basis: &LagrangeBasis,
    i: usize,
    sign: f64,
    set: &FeasibleSet,
    x: &Vector,
    r: f64,
    start: Vector,
) -> Result<Vector> {
    let poly = &basis.polys[i];
    let mut y = start;
    let mut val = sign * poly.evaluate(&y);
    let mut step = r;
    for _ in 0..200 {
        let grad = poly.gradient(&y) * sign;
        let gn = grad.norm();
        if gn == 0.0 {
            break;
        }
        let cand = project_feasible_ball(set, x, r, &(&y + grad * (step / gn)))?;
        let cv = sign * poly.evaluate(&cand);
        if cv > val + 1e-15 * (1.0 + val.abs()) {
            y = cand;
            val = cv;
        } else {
            step *= 0.5;
            if step < 1e-9 * r {
                break;
            }
        }
    }
    Ok(y)
}

/// Best point for `|ℓᵢ|` over `C ∩ B(x, r)` among ascent results and the given feasible samples.
pub(crate) fn constrained_maximizer(
    basis: &LagrangeBasis,
    i: usize,
    set: &FeasibleSet,
    x: &Vector,
    r: f64,
    samples: &[Vector],
) -> Result<(Vector, f64)> {
    let mut best = (x.clone(), basis.value(i, x).abs());
    let consider = |y: Vector, best: &mut (Vector, f64)| {
        let v = basis.value(i, &y).abs();
        if v > best.1 {
            *best = (y, v);
        }
    };
    let starts = ball_witnesses(basis, i, x, r)?;
    for (sign, start) in [1.0, -1.0].into_iter().zip(starts) {
        let y0 = project_feasible_ball(set, x, r, &start)?;
        let y = ascend(basis, i, sign, set, x, r, y0)?;
        consider(y, &mut best);
    }
    for y in samples {
        consider(y.clone(), &mut best);
    }
    Ok(best)
}

/// Feasible low-discrepancy sample of `C ∩ B(x, r)`.
pub(crate) fn feasible_samples(set: &FeasibleSet, x: &Vector, r: f64) -> Vec<Vector> {
    ball_samples(x, r, SAMPLE_COUNT).into_iter().filter(|y| set.contains(y)).collect()
}

/// Estimates `Λ∞` and `Λ₁` over `B(x, Δ)`, or over `C ∩ B(x, min(Δ, 1))` when `constrained` is given.
pub fn estimate_poisedness(
    basis: &LagrangeBasis,
    x: &Vector,
    delta: f64,
    constrained: Option<&FeasibleSet>,
) -> Result<PoisednessReport> {
    let p = basis.p();
    let radius = if constrained.is_some() { delta.min(1.0) } else { delta };
    let mut per_point = vec![0.0; p];
    let mut per_point_witness = vec![x.clone(); p];
    let mut candidates: Vec<Vector> = vec![x.clone()];
    let mut sample_size = 0;

    match constrained.filter(|c| !c.is_whole_space()) {
        None => {
            for i in 0..p {
                for y in ball_witnesses(basis, i, x, radius)? {
                    let v = basis.value(i, &y).abs();
                    if v > per_point[i] {
                        per_point[i] = v;
                        per_point_witness[i] = y.clone();
                    }
                    candidates.push(y);
                }
            }
        }
        Some(set) => {
            let samples = feasible_samples(set, x, radius);
            sample_size = samples.len();
            for i in 0..p {
                let (y, v) = constrained_maximizer(basis, i, set, x, radius, &samples)?;
                per_point[i] = v;
                per_point_witness[i] = y.clone();
                candidates.push(y);
            }
            candidates.extend(samples);
        }
    }
    for y in basis.set.points() {
        let inside = (y - x).norm() <= radius * (1.0 + 1e-12);
        if inside && constrained.is_none_or(|c| c.contains(y)) {
            candidates.push(y.clone());
        }
    }

    let mut lambda_one: f64 = 0.0;
    for y in &candidates {
        let lam = basis.lambda_at(y);
        lambda_one = lambda_one.max(lam.lp_norm(1));
        for i in 0..p {
            if lam[i].abs() > per_point[i] {
                per_point[i] = lam[i].abs();
                per_point_witness[i] = y.clone();
            }
        }
    }
    let (index, lambda_inf) = per_point
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });
    Ok(PoisednessReport {
        lambda_inf,
        lambda_one,
        witness: per_point_witness[index].as_slice().to_vec(),
        index,
        per_point,
        per_point_witness: per_point_witness.iter().map(|w| w.as_slice().to_vec()).collect(),
        radius,
        sample_size,
    })
}
