use nalgebra::SVD;

use crate::error::{DfoError, Result};
use crate::linalg::{inf_norm, inverse_and_det, Matrix, Vector};

use super::set::{natural_basis, quadratic_basis_len, BasisKind, InterpolationSet};

/// Largest accepted ∞-norm condition number of a square interpolation matrix.
pub const COND_MAX: f64 = 1e12;
/// Smallest accepted ratio of extreme singular values for regression.
pub const RANK_TOL: f64 = 1e-12;

/// Assembled interpolation matrix in scaled variables together with its (pseudo-)inverse.
#[derive(Debug, Clone)]
pub struct InterpSystem {
    pub kind: BasisKind,
    /// `M̂`, `Q̂`, `F̂`, or the `p × (n+1)` regression matrix.
    pub matrix: Matrix,
    /// Inverse, or the pseudo-inverse for regression.
    pub inverse: Matrix,
    /// `‖matrix⁻¹‖∞` (pseudo-inverse for regression).
    pub inv_norm_inf: f64,
    /// `‖M̂†‖∞` of the `p × (n+1)` linear block; equals `inv_norm_inf` for linear and regression.
    pub linear_pinv_norm_inf: f64,
    /// Determinant of a square system.
    pub determinant: Option<f64>,
    /// `‖A‖∞‖A⁻¹‖∞`, or `σ_max/σ_min` for regression.
    pub cond: f64,
    n: usize,
    p: usize,
}

/// Rows `[1, ŝᵢᵀ]`.
pub(crate) fn linear_block(set: &InterpolationSet) -> Matrix {
    let (n, p) = (set.n(), set.p());
    let mut m = Matrix::zeros(p, n + 1);
    for i in 0..p {
        m[(i, 0)] = 1.0;
        let s = set.scaled(i);
        for j in 0..n {
            m[(i, j + 1)] = s[j];
        }
    }
    m
}

/// Scaled interpolation matrix of `set` without factorizing it.
pub fn assemble_matrix(set: &InterpolationSet) -> Matrix {
    let (n, p) = (set.n(), set.p());
    match set.kind() {
        BasisKind::Linear | BasisKind::Regression => linear_block(set),
        BasisKind::FullQuadratic => {
            let mut m = Matrix::zeros(p, quadratic_basis_len(n));
            for i in 0..p {
                m.set_row(i, &natural_basis(&set.scaled(i)).transpose());
            }
            m
        }
        BasisKind::MinFrobenius => {
            let mb = linear_block(set);
            let scaled: Vec<Vector> = (0..p).map(|i| set.scaled(i)).collect();
            let dim = p + n + 1;
            let mut f = Matrix::zeros(dim, dim);
            for i in 0..p {
                for j in 0..p {
                    f[(i, j)] = 0.5 * scaled[i].dot(&scaled[j]).powi(2);
                }
            }
            f.view_mut((0, p), (p, n + 1)).copy_from(&mb);
            f.view_mut((p, 0), (n + 1, p)).copy_from(&mb.transpose());
            f
        }
    }
}

fn pinv_checked(m: &Matrix) -> Result<(Matrix, f64)> {
    let svd = SVD::new(m.clone(), true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smax > 0.0) || smin < RANK_TOL * smax {
        return Err(DfoError::RankDeficient { ratio: if smax > 0.0 { smin / smax } else { 0.0 } });
    }
    let pinv = svd.pseudo_inverse(0.0).map_err(|_| DfoError::RankDeficient { ratio: smin / smax })?;
    Ok((pinv, smax / smin))
}

fn square(kind: BasisKind, matrix: Matrix, linear_pinv_norm_inf: Option<f64>, n: usize, p: usize) -> Result<InterpSystem> {
    let (inverse, det) =
        inverse_and_det(&matrix).ok_or(DfoError::SingularSystem { cond: f64::INFINITY })?;
    let inv_norm_inf = inf_norm(&inverse);
    let cond = inf_norm(&matrix) * inv_norm_inf;
    if !(cond <= COND_MAX) {
        return Err(DfoError::SingularSystem { cond });
    }
    Ok(InterpSystem {
        kind,
        matrix,
        inverse,
        inv_norm_inf,
        linear_pinv_norm_inf: linear_pinv_norm_inf.unwrap_or(inv_norm_inf),
        determinant: Some(det),
        cond,
        n,
        p,
    })
}

impl InterpSystem {
    /// Builds and factorizes the scaled system for `set`.
    pub fn assemble(set: &InterpolationSet) -> Result<Self> {
        let (n, p) = (set.n(), set.p());
        let matrix = assemble_matrix(set);
        match set.kind() {
            BasisKind::Linear | BasisKind::FullQuadratic => square(set.kind(), matrix, None, n, p),
            BasisKind::MinFrobenius => {
                let lin_norm = SVD::new(linear_block(set), true, true)
                    .pseudo_inverse(0.0)
                    .map(|m| inf_norm(&m))
                    .unwrap_or(f64::INFINITY);
                square(BasisKind::MinFrobenius, matrix, Some(lin_norm), n, p)
            }
            BasisKind::Regression => {
                let (pinv, cond) = pinv_checked(&matrix)?;
                let norm = inf_norm(&pinv);
                Ok(InterpSystem {
                    kind: BasisKind::Regression,
                    matrix,
                    inverse: pinv,
                    inv_norm_inf: norm,
                    linear_pinv_norm_inf: norm,
                    determinant: None,
                    cond,
                    n,
                    p,
                })
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Coefficient vector for a right-hand side (padded with zeros for min-Frobenius).
    pub(crate) fn solve(&self, rhs: &Vector) -> Vector {
        if self.kind == BasisKind::MinFrobenius {
            let mut full = Vector::zeros(self.p + self.n + 1);
            full.rows_mut(0, self.p).copy_from(rhs);
            &self.inverse * full
        } else {
            &self.inverse * rhs
        }
    }

    /// Vector `λ(y)` of all Lagrange polynomial values at scaled point `ŝ`.
    pub fn lagrange_values_scaled(&self, s: &Vector) -> Vector {
        match self.kind {
            BasisKind::Linear | BasisKind::Regression => {
                let mut phi = Vector::zeros(self.n + 1);
                phi[0] = 1.0;
                phi.rows_mut(1, self.n).copy_from(s);
                self.inverse.tr_mul(&phi)
            }
            BasisKind::FullQuadratic => self.inverse.tr_mul(&natural_basis(s)),
            BasisKind::MinFrobenius => {
                let mut rhs = Vector::zeros(self.p + self.n + 1);
                // ŝᵢ are read back from the linear block of F̂.
                for i in 0..self.p {
                    let si = self.matrix.view((i, self.p + 1), (1, self.n)).transpose();
                    rhs[i] = 0.5 * si.dot(s).powi(2);
                }
                rhs[self.p] = 1.0;
                rhs.rows_mut(self.p + 1, self.n).copy_from(s);
                (&self.inverse * rhs).rows(0, self.p).into_owned()
            }
        }
    }
}
