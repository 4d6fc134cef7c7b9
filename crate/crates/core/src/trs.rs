//! Trust-region subproblem solvers for `min gᵀs + ½sᵀHs` subject to `‖s‖ ≤ Δ`.

use nalgebra::Cholesky;
use serde::{Deserialize, Serialize};

use crate::error::{DfoError, Result};
use crate::linalg::{
    boundary_roots, ensure_dim, ensure_finite_mat, ensure_finite_vec, ensure_square, sorted_eigen,
    sym_norm2, symmetrize, Matrix, Vector,
};
use crate::problem::FeasibleSet;

/// Default tolerance of the exact solver.
pub const EXACT_TOL: f64 = 1e-10;
/// Eigenvalues above `-EIG_TOL` count as nonnegative curvature.
pub const EIG_TOL: f64 = 1e-12;
/// Sufficient-decrease constant used by the projected-gradient step.
pub const KAPPA_S_PROJECTED: f64 = 0.1;
/// Sufficient-decrease constant assumed for unconstrained steps.
pub const KAPPA_S: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrsStatus {
    Interior,
    Boundary,
    HardCase,
    NegativeCurvatureExit,
    BoundaryExit,
    Converged,
}

/// Approximate or exact minimizer of the trust-region subproblem.
#[derive(Debug, Clone)]
pub struct TrsSolution {
    pub s: Vector,
    /// `m(0) − m(s)`, never negative.
    pub predicted_decrease: f64,
    /// Lagrange multiplier of the norm constraint (exact solver only).
    pub multiplier: Option<f64>,
    pub status: TrsStatus,
}

/// `m(0) − m(s)` for the model `gᵀs + ½sᵀHs`.
pub fn model_decrease(g: &Vector, h: &Matrix, s: &Vector) -> f64 {
    -(g.dot(s) + 0.5 * s.dot(&(h * s)))
}

fn check_inputs(g: &Vector, h: &Matrix, delta: f64) -> Result<()> {
    ensure_square(h, g.len())?;
    ensure_finite_vec(g, "model gradient")?;
    ensure_finite_mat(h, "model Hessian")?;
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(DfoError::config(format!("trust-region radius must be positive, got {delta}")));
    }
    Ok(())
}

fn zero_step(n: usize) -> TrsSolution {
    TrsSolution { s: Vector::zeros(n), predicted_decrease: 0.0, multiplier: None, status: TrsStatus::Converged }
}

fn solution(g: &Vector, h: &Matrix, s: Vector, multiplier: Option<f64>, status: TrsStatus) -> TrsSolution {
    let predicted_decrease = model_decrease(g, h, &s).max(0.0);
    TrsSolution { s, predicted_decrease, multiplier, status }
}

/// Global minimizer of the model along `−g` within the trust region.
pub fn cauchy_point(g: &Vector, h: &Matrix, delta: f64) -> Result<TrsSolution> {
    check_inputs(g, h, delta)?;
    let gn = g.norm();
    if gn == 0.0 {
        return Ok(zero_step(g.len()));
    }
    let curv = g.dot(&(h * g));
    let t_max = delta / gn;
    let (t, status) = if curv <= 0.0 {
        (t_max, TrsStatus::Boundary)
    } else {
        let t_star = gn * gn / curv;
        if t_star >= t_max {
            (t_max, TrsStatus::Boundary)
        } else {
            (t_star, TrsStatus::Interior)
        }
    };
    Ok(solution(g, h, -g * t, None, status))
}

/// Exact solution of the subproblem via safeguarded Newton on the secular equation.
///
/// The returned pair `(s, λ)` satisfies `(H + λI)s = −g`, `H + λI ⪰ 0`, `λ ≥ 0`,
/// `‖s‖ ≤ Δ` and `λ(Δ − ‖s‖) = 0` to tolerance `tol`.
pub fn solve_trs_exact(g: &Vector, h: &Matrix, delta: f64, tol: f64) -> Result<TrsSolution> {
    check_inputs(g, h, delta)?;
    let n = g.len();
    if n == 0 {
        return Ok(zero_step(0));
    }
    let h = symmetrize(h);
    let eig = sorted_eigen(&h);
    let lmin = eig.values[0];
    let hnorm = eig.values[0].abs().max(eig.values[n - 1].abs());
    let gn = g.norm();

    // Interior Newton step when H is positive definite.
    if lmin > 0.0 {
        if let Some(chol) = Cholesky::new(h.clone()) {
            let s = -chol.solve(g);
            if s.norm() <= delta {
                return Ok(solution(g, &h, s, Some(0.0), TrsStatus::Interior));
            }
        }
    }

    let lam_lo = (-lmin).max(0.0);
    let ghat = eig.vectors.transpose() * g;

    // Hard case: the step at the smallest admissible multiplier stays inside the ball.
    if lmin <= 0.0 || gn == 0.0 {
        let probe = lam_lo + 1e-12;
        let probe_norm = ghat
            .iter()
            .zip(eig.values.iter())
            .map(|(gi, mu)| (gi / (mu + probe)).powi(2))
            .sum::<f64>()
            .sqrt();
        if probe_norm < delta {
            return hard_case(g, &h, delta, &eig.values, &eig.vectors, &ghat, lmin, hnorm);
        }
    }

    let mut lo = lam_lo;
    let mut hi = gn / delta + hnorm;
    let mut lam = if lmin > 0.0 { 0.0 } else { lam_lo };
    let max_iters = 500;
    let mut best: Option<(Vector, f64)> = None;
    for _ in 0..max_iters {
        let shifted = &h + Matrix::identity(n, n) * lam;
        let Some(chol) = Cholesky::new(shifted) else {
            if lam >= hi {
                return Err(DfoError::FactorizationFailure { lambda: lam });
            }
            lo = lo.max(lam);
            lam = 0.5 * (lo + hi);
            continue;
        };
        let s = -chol.solve(g);
        let ns = s.norm();
        if ns <= delta {
            best = Some((s.clone(), lam));
        }
        if (ns - delta).abs() <= tol * delta {
            return Ok(solution(g, &h, clip(s, delta), Some(lam), TrsStatus::Boundary));
        }
        if ns > delta {
            lo = lam;
        } else {
            hi = lam;
        }
        let w = chol.l().solve_lower_triangular(&s).unwrap_or_else(|| s.clone());
        let mut next = lam + (ns / w.norm()).powi(2) * (ns - delta) / delta;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (hi - lo) <= 4.0 * f64::EPSILON * hi.max(1.0) {
            break;
        }
        lam = next;
    }
    match best {
        Some((s, lam)) => Ok(solution(g, &h, clip(s, delta), Some(lam), TrsStatus::Boundary)),
        None => Err(DfoError::FactorizationFailure { lambda: hi }),
    }
}

/// Rescales tiny overshoots so that `‖s‖ ≤ Δ` holds exactly.
fn clip(s: Vector, delta: f64) -> Vector {
    let ns = s.norm();
    if ns > delta {
        s * (delta / ns)
    } else {
        s
    }
}

#[allow(clippy::too_many_arguments)]
fn hard_case(
    g: &Vector,
    h: &Matrix,
    delta: f64,
    values: &Vector,
    vectors: &Matrix,
    ghat: &Vector,
    lmin: f64,
    hnorm: f64,
) -> Result<TrsSolution> {
    let n = g.len();
    let lam = (-lmin).max(0.0);
    let eig_tol = 1e-10 * hnorm.max(1.0);
    // Pseudo-inverse step that ignores the bottom eigenspace.
    let mut s = Vector::zeros(n);
    for i in 0..n {
        let shifted = values[i] + lam;
        if values[i] - lmin > eig_tol && shifted > 0.0 {
            s -= vectors.column(i) * (ghat[i] / shifted);
        }
    }
    let u: Vector = vectors.column(0).into_owned();
    let (neg, pos) = boundary_roots(&s, &u, delta);
    let s_neg = &s + &u * neg;
    let s_pos = &s + &u * pos;
    let s = if model_decrease(g, h, &s_neg) >= model_decrease(g, h, &s_pos) { s_neg } else { s_pos };
    Ok(solution(g, h, clip(s, delta), Some(lam), TrsStatus::HardCase))
}

/// Steihaug–Toint truncated conjugate gradients with a matrix-free Hessian.
pub fn steihaug_toint(
    g: &Vector,
    h_apply: &dyn Fn(&Vector) -> Vector,
    delta: f64,
    tol: f64,
    max_iters: usize,
) -> Result<TrsSolution> {
    ensure_finite_vec(g, "model gradient")?;
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(DfoError::config(format!("trust-region radius must be positive, got {delta}")));
    }
    let n = g.len();
    let gn = g.norm();
    if gn == 0.0 {
        return Ok(zero_step(n));
    }
    let finish = |s: Vector, status: TrsStatus| -> Result<TrsSolution> {
        let hs = h_apply(&s);
        ensure_dim(&hs, n)?;
        let dec = -(g.dot(&s) + 0.5 * s.dot(&hs));
        Ok(TrsSolution { s, predicted_decrease: dec.max(0.0), multiplier: None, status })
    };
    let mut s = Vector::zeros(n);
    let mut r = g.clone();
    let mut d = -g;
    let mut rr = r.norm_squared();
    for _ in 0..max_iters {
        let hd = h_apply(&d);
        ensure_dim(&hd, n)?;
        let curv = d.dot(&hd);
        if curv <= 0.0 {
            let (_, tau) = boundary_roots(&s, &d, delta);
            return finish(&s + &d * tau, TrsStatus::NegativeCurvatureExit);
        }
        let alpha = rr / curv;
        let s_next = &s + &d * alpha;
        if s_next.norm() >= delta {
            let (_, tau) = boundary_roots(&s, &d, delta);
            return finish(&s + &d * tau, TrsStatus::BoundaryExit);
        }
        s = s_next;
        r += &hd * alpha;
        let rr_next = r.norm_squared();
        if rr_next.sqrt() <= tol * gn {
            return finish(s, TrsStatus::Converged);
        }
        d = -&r + &d * (rr_next / rr);
        rr = rr_next;
    }
    let best = finish(s, TrsStatus::Interior)?;
    Err(DfoError::MaxItersExceeded { best: Box::new(best) })
}

/// Step of length Δ along a unit eigenvector of the smallest eigenvalue, signed so `uᵀg ≤ 0`.
pub fn eigenstep(g: &Vector, h: &Matrix, delta: f64) -> Result<TrsSolution> {
    check_inputs(g, h, delta)?;
    let eig = sorted_eigen(h);
    let lmin = eig.values[0];
    if lmin >= -EIG_TOL {
        return Err(DfoError::NoNegativeCurvature { lambda_min: lmin });
    }
    let mut u: Vector = eig.vectors.column(0).into_owned();
    if u.dot(g) > 0.0 {
        u = -u;
    }
    Ok(solution(g, h, u * delta, None, TrsStatus::Boundary))
}

/// Best of the Cauchy point, the eigenstep (when curvature is negative) and the exact solution.
pub fn solve_trs_secondorder(g: &Vector, h: &Matrix, delta: f64) -> Result<TrsSolution> {
    let mut best = cauchy_point(g, h, delta)?;
    let candidates = [eigenstep(g, h, delta), solve_trs_exact(g, h, delta, EXACT_TOL)];
    for cand in candidates.into_iter().flatten() {
        if cand.predicted_decrease > best.predicted_decrease {
            best = cand;
        }
    }
    Ok(best)
}

/// Search along the projected-gradient path `proj(x − tg) − x`: extend `t` while the step fits in
/// the trust region, then backtrack by halving.
///
/// `pi_m` is the model criticality measure at `x`; the accepted step achieves
/// `0.1 · π · min(Δ, π/(‖H‖+1), 1)` decrease.
pub fn projected_gradient_cauchy(
    g: &Vector,
    h: &Matrix,
    delta: f64,
    x: &Vector,
    set: &FeasibleSet,
    pi_m: f64,
) -> Result<TrsSolution> {
    check_inputs(g, h, delta)?;
    ensure_dim(x, g.len())?;
    let gn = g.norm();
    if gn == 0.0 || pi_m <= 0.0 {
        return Ok(zero_step(g.len()));
    }
    let bound = KAPPA_S_PROJECTED * pi_m * delta.min(pi_m / (sym_norm2(h) + 1.0)).min(1.0);
    let cp = cauchy_point(g, h, delta)?;
    if cp.predicted_decrease >= bound && set.contains(&(x + &cp.s)) {
        return Ok(cp);
    }
    // Extend the path while the projected step still fits in the trust region.
    let mut t = delta / gn;
    for _ in 0..60 {
        let s = set.project(&(x - g * (2.0 * t)))? - x;
        let prev = set.project(&(x - g * t))? - x;
        if s.norm() > delta || (&s - &prev).norm() <= 1e-14 * (1.0 + s.norm()) {
            break;
        }
        t *= 2.0;
    }
    for _ in 0..120 {
        let s = set.project(&(x - g * t))? - x;
        let ns = s.norm();
        if ns <= delta * (1.0 + 1e-12) {
            let dec = model_decrease(g, h, &s);
            if dec >= bound {
                let status =
                    if ns >= delta * (1.0 - 1e-12) { TrsStatus::Boundary } else { TrsStatus::Interior };
                return Ok(TrsSolution { s, predicted_decrease: dec, multiplier: None, status });
            }
        }
        t *= 0.5;
    }
    Err(DfoError::LineSearchFailure)
}
