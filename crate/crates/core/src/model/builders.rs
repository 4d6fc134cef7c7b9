use crate::error::{DfoError, Result};
use crate::linalg::{ensure_finite_vec, ensure_square, Matrix, Vector};

use super::set::{BasisKind, InterpolationSet};
use super::system::InterpSystem;
use super::{ModelKind, QuadraticModel};

fn check_values(set: &InterpolationSet, fvals: &[f64]) -> Result<Vector> {
    if fvals.len() != set.p() {
        return Err(DfoError::DimensionMismatch { expected: set.p(), got: fvals.len() });
    }
    let v = Vector::from_column_slice(fvals);
    ensure_finite_vec(&v, "function values")?;
    Ok(v)
}

fn require_kind(set: &InterpolationSet, kind: BasisKind) -> Result<()> {
    if set.kind() == kind {
        Ok(())
    } else {
        Err(DfoError::config(format!("expected a {kind:?} interpolation set, got {:?}", set.kind())))
    }
}

/// Converts scaled coefficients `[c, ĝ, Ĥ upper triangle]` into an unscaled model.
fn from_natural_coeffs(set: &InterpolationSet, coeffs: &Vector, kind: ModelKind) -> QuadraticModel {
    let n = set.n();
    let d = set.delta();
    let g = coeffs.rows(1, n) / d;
    let mut h = Matrix::zeros(n, n);
    if coeffs.len() > n + 1 {
        let mut k = n + 1;
        for i in 0..n {
            for j in i..n {
                h[(i, j)] = coeffs[k] / (d * d);
                h[(j, i)] = h[(i, j)];
                k += 1;
            }
        }
    }
    QuadraticModel { x: set.base().clone(), c: coeffs[0], g, h, kind }
}

impl InterpSystem {
    /// Model interpolating (or fitting) `fvals` on `set`.
    ///
    /// `h_prev` selects the minimum-change variant and is only used for min-Frobenius systems.
    pub fn model(&self, set: &InterpolationSet, fvals: &Vector, h_prev: Option<&Matrix>) -> Result<QuadraticModel> {
        let n = set.n();
        let model = match self.kind {
            BasisKind::Linear => from_natural_coeffs(set, &self.solve(fvals), ModelKind::Linear),
            BasisKind::Regression => from_natural_coeffs(set, &self.solve(fvals), ModelKind::Regression),
            BasisKind::FullQuadratic => from_natural_coeffs(set, &self.solve(fvals), ModelKind::FullQuadratic),
            BasisKind::MinFrobenius => {
                let p = set.p();
                let d = set.delta();
                let mut rhs = fvals.clone();
                if let Some(hp) = h_prev {
                    ensure_square(hp, n)?;
                    for i in 0..p {
                        let s = set.point(i) - set.base();
                        rhs[i] -= 0.5 * s.dot(&(hp * &s));
                    }
                }
                let z = self.solve(&rhs);
                let mut h_hat = Matrix::zeros(n, n);
                for i in 0..p {
                    let s = set.scaled(i);
                    h_hat += &s * s.transpose() * z[i];
                }
                let mut h = h_hat / (d * d);
                let kind = match h_prev {
                    Some(hp) => {
                        h += hp;
                        ModelKind::MinChangeFrobenius
                    }
                    None => ModelKind::MinFrobenius,
                };
                let g = z.rows(p + 1, n) / d;
                QuadraticModel::new(set.base().clone(), z[p], g, h, kind)?
            }
        };
        ensure_finite_vec(&model.g, "model gradient")?;
        Ok(model)
    }
}

/// Linear interpolation on `n + 1` points.
pub fn build_linear(set: &InterpolationSet, fvals: &[f64]) -> Result<QuadraticModel> {
    require_kind(set, BasisKind::Linear)?;
    let f = check_values(set, fvals)?;
    InterpSystem::assemble(set)?.model(set, &f, None)
}

/// Fully determined quadratic interpolation in the natural basis.
pub fn build_full_quadratic(set: &InterpolationSet, fvals: &[f64]) -> Result<QuadraticModel> {
    require_kind(set, BasisKind::FullQuadratic)?;
    let f = check_values(set, fvals)?;
    InterpSystem::assemble(set)?.model(set, &f, None)
}

/// Least-squares linear model on more than `n + 1` points.
pub fn build_regression(set: &InterpolationSet, fvals: &[f64]) -> Result<QuadraticModel> {
    require_kind(set, BasisKind::Regression)?;
    let f = check_values(set, fvals)?;
    InterpSystem::assemble(set)?.model(set, &f, None)
}

/// Minimum Frobenius norm quadratic interpolant, or the minimum-change variant when `h_prev` is given.
pub fn build_min_frobenius(set: &InterpolationSet, fvals: &[f64], h_prev: Option<&Matrix>) -> Result<QuadraticModel> {
    require_kind(set, BasisKind::MinFrobenius)?;
    let f = check_values(set, fvals)?;
    InterpSystem::assemble(set)?.model(set, &f, h_prev)
}

/// Dispatches on the set's basis kind (pure min-Frobenius for that kind).
pub fn build_model(set: &InterpolationSet, fvals: &[f64]) -> Result<QuadraticModel> {
    let f = check_values(set, fvals)?;
    InterpSystem::assemble(set)?.model(set, &f, None)
}

/// Gauss–Newton model `(½‖c‖², Jᵀc, JᵀJ)` from linear interpolants of each residual.
pub fn build_composite_least_squares(set: &InterpolationSet, residual_vectors: &[Vector]) -> Result<QuadraticModel> {
    require_kind(set, BasisKind::Linear)?;
    if residual_vectors.len() != set.p() {
        return Err(DfoError::DimensionMismatch { expected: set.p(), got: residual_vectors.len() });
    }
    let m = residual_vectors[0].len();
    for r in residual_vectors {
        if r.len() != m {
            return Err(DfoError::DimensionMismatch { expected: m, got: r.len() });
        }
        ensure_finite_vec(r, "residual vector")?;
    }
    let n = set.n();
    let system = InterpSystem::assemble(set)?;
    let mut c_vec = Vector::zeros(m);
    let mut jac = Matrix::zeros(m, n);
    for k in 0..m {
        let rk = Vector::from_iterator(set.p(), residual_vectors.iter().map(|r| r[k]));
        let lin = system.model(set, &rk, None)?;
        c_vec[k] = lin.c;
        jac.set_row(k, &lin.g.transpose());
    }
    let g = jac.tr_mul(&c_vec);
    let h = jac.tr_mul(&jac);
    QuadraticModel::new(set.base().clone(), 0.5 * c_vec.norm_squared(), g, h, ModelKind::Composite)
}
