//! Convex feasible sets described by their Euclidean projections.

use serde::{Deserialize, Serialize};

use crate::error::{DfoError, Result};
use crate::linalg::{ensure_dim, ensure_finite_vec, Vector};

/// Dykstra stopping tolerance on the change of the iterate over one sweep.
pub const DYKSTRA_TOL: f64 = 1e-10;
/// Dykstra sweep limit.
pub const DYKSTRA_MAX_ITERS: usize = 10_000;
/// Relative tolerance of the membership test.
pub const MEMBERSHIP_TOL: f64 = 1e-10;

/// Closed convex set with nonempty interior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FeasibleSet {
    WholeSpace,
    /// Componentwise bounds; infinite entries mean no bound on that side.
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// `{x : aᵀx ≤ b}` with `a ≠ 0`.
    Halfspace { a: Vec<f64>, b: f64 },
    Intersection(Vec<FeasibleSet>),
}

impl FeasibleSet {
    pub fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let s = FeasibleSet::Box { lower, upper };
        s.validate()?;
        Ok(s)
    }

    pub fn halfspace(a: Vec<f64>, b: f64) -> Result<Self> {
        let s = FeasibleSet::Halfspace { a, b };
        s.validate()?;
        Ok(s)
    }

    pub fn intersection(sets: Vec<FeasibleSet>) -> Result<Self> {
        let s = FeasibleSet::Intersection(sets);
        s.validate()?;
        Ok(s)
    }

    pub fn is_whole_space(&self) -> bool {
        match self {
            FeasibleSet::WholeSpace => true,
            FeasibleSet::Intersection(sets) => sets.iter().all(|s| s.is_whole_space()),
            _ => false,
        }
    }

    /// Checks the structural invariants of the descriptor.
    pub fn validate(&self) -> Result<()> {
        match self {
            FeasibleSet::WholeSpace => Ok(()),
            FeasibleSet::Box { lower, upper } => {
                if lower.len() != upper.len() {
                    return Err(DfoError::DimensionMismatch { expected: lower.len(), got: upper.len() });
                }
                for (l, u) in lower.iter().zip(upper) {
                    if l.is_nan() || u.is_nan() || l > u || *l == f64::INFINITY || *u == f64::NEG_INFINITY {
                        return Err(DfoError::config(format!("invalid box bounds [{l}, {u}]")));
                    }
                }
                Ok(())
            }
            FeasibleSet::Halfspace { a, b } => {
                if !b.is_finite() || a.iter().any(|v| !v.is_finite()) {
                    return Err(DfoError::NonFinite { what: "halfspace data" });
                }
                if a.iter().all(|v| *v == 0.0) {
                    return Err(DfoError::config("halfspace normal must be nonzero"));
                }
                Ok(())
            }
            FeasibleSet::Intersection(sets) => sets.iter().try_for_each(|s| s.validate()),
        }
    }

    /// Euclidean projection of `x` onto the set.
    pub fn project(&self, x: &Vector) -> Result<Vector> {
        ensure_finite_vec(x, "projection input")?;
        match self {
            FeasibleSet::WholeSpace => Ok(x.clone()),
            FeasibleSet::Box { lower, upper } => {
                ensure_dim(x, lower.len())?;
                Ok(Vector::from_iterator(
                    x.len(),
                    x.iter().enumerate().map(|(i, &v)| {
                        let mut c = v;
                        if lower[i].is_finite() {
                            c = c.max(lower[i]);
                        }
                        if upper[i].is_finite() {
                            c = c.min(upper[i]);
                        }
                        c
                    }),
                ))
            }
            FeasibleSet::Halfspace { a, b } => {
                ensure_dim(x, a.len())?;
                let a = Vector::from_column_slice(a);
                let viol = (a.dot(x) - b).max(0.0);
                Ok(x - a.scale(viol / a.norm_squared()))
            }
            FeasibleSet::Intersection(sets) => {
                let projs: Vec<Box<dyn Fn(&Vector) -> Result<Vector> + '_>> = sets
                    .iter()
                    .map(|s| Box::new(move |v: &Vector| s.project(v)) as Box<dyn Fn(&Vector) -> Result<Vector>>)
                    .collect();
                dykstra(&projs, x, DYKSTRA_TOL, DYKSTRA_MAX_ITERS)
            }
        }
    }

    /// Membership test `‖P(x) − x‖ ≤ 1e-10 (1 + ‖x‖)`.
    pub fn contains(&self, x: &Vector) -> bool {
        match self.project(x) {
            Ok(p) => (p - x).norm() <= MEMBERSHIP_TOL * (1.0 + x.norm()),
            Err(_) => false,
        }
    }

    /// Projection onto `{y ∈ C : ‖y − center‖ ≤ radius}`.
    pub fn project_with_ball(&self, x: &Vector, center: &Vector, radius: f64) -> Result<Vector> {
        let ball = |v: &Vector| -> Result<Vector> { Ok(project_ball(v, center, radius)) };
        if self.is_whole_space() {
            return ball(x);
        }
        let set = |v: &Vector| self.project(v);
        let projs: [&dyn Fn(&Vector) -> Result<Vector>; 2] = [&set, &ball];
        dykstra(&projs, x, DYKSTRA_TOL, DYKSTRA_MAX_ITERS)
    }
}

/// Projection onto the closed ball `B(center, radius)`.
pub fn project_ball(x: &Vector, center: &Vector, radius: f64) -> Vector {
    let d = x - center;
    let r = d.norm();
    if r <= radius {
        x.clone()
    } else {
        center + d * (radius / r)
    }
}

/// Dykstra's alternating projection onto the intersection of convex sets.
///
/// Stops when both the iterate and the correction terms move by at most `tol · (1 + ‖x‖)` over a
/// full sweep.
pub fn dykstra<P>(projs: &[P], x0: &Vector, tol: f64, max_iters: usize) -> Result<Vector>
where
    P: std::ops::Deref,
    P::Target: Fn(&Vector) -> Result<Vector>,
{
    let mut x = x0.clone();
    let mut increments = vec![Vector::zeros(x0.len()); projs.len()];
    for _ in 0..max_iters {
        let start = x.clone();
        let mut inc_change = 0.0f64;
        for (proj, inc) in projs.iter().zip(increments.iter_mut()) {
            let shifted = &x + &*inc;
            let y = proj(&shifted)?;
            let next = shifted - &y;
            inc_change += (&next - &*inc).norm_squared();
            *inc = next;
            x = y;
        }
        let scale = tol * (1.0 + x.norm());
        if (&x - &start).norm() <= scale && inc_change.sqrt() <= scale {
            return Ok(x);
        }
    }
    Err(DfoError::NonConvergence { what: "Dykstra projection", iters: max_iters })
}
