//! Low-discrepancy sampling of balls and feasible projections onto `C ∩ B(x, r)`.

use crate::error::Result;
use crate::linalg::Vector;
use crate::problem::FeasibleSet;

/// Number of low-discrepancy points used by the constrained searches.
pub const SAMPLE_COUNT: usize = 10_000;

fn first_primes(count: usize) -> Vec<u64> {
    let mut primes = Vec::with_capacity(count);
    let mut k = 2u64;
    while primes.len() < count {
        if primes.iter().take_while(|&&p| p * p <= k).all(|&p| k % p != 0) {
            primes.push(k);
        }
        k += 1;
    }
    primes
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut out = 0.0;
    while i > 0 {
        out += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    out
}

/// Halton points in `[0,1)ⁿ`, skipping the origin.
pub fn halton(n: usize, count: usize) -> Vec<Vector> {
    let primes = first_primes(n);
    (1..=count as u64)
        .map(|i| Vector::from_iterator(n, primes.iter().map(|&b| radical_inverse(i, b))))
        .collect()
}

/// Halton points mapped onto `B(x, r)` via the cube-to-ball map `u ↦ u‖u‖∞/‖u‖₂`.
pub fn ball_samples(x: &Vector, r: f64, count: usize) -> Vec<Vector> {
    halton(x.len(), count)
        .into_iter()
        .map(|h| {
            let u = h * 2.0 - Vector::from_element(x.len(), 1.0);
            let nu = u.norm();
            if nu == 0.0 {
                x.clone()
            } else {
                x + u.scale(u.amax() / nu * r)
            }
        })
        .collect()
}

/// A point of `C ∩ B(x, r)` near the projection of `y`; requires `x ∈ C`.
///
/// The Dykstra output is snapped onto `C` and pulled back along the segment to `x`,
/// so the result is feasible up to the accuracy of the single-set projection.
pub fn project_feasible_ball(set: &FeasibleSet, x: &Vector, r: f64, y: &Vector) -> Result<Vector> {
    let z = set.project(&set.project_with_ball(y, x, r)?)?;
    let d = &z - x;
    let nd = d.norm();
    Ok(if nd > r { x + d * (r / nd) } else { z })
}
