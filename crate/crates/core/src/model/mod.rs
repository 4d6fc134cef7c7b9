//! Local quadratic models and the interpolation systems that produce them.

mod builders;
mod constants;
mod set;
mod system;

pub use builders::{
    build_composite_least_squares, build_full_quadratic, build_linear, build_min_frobenius, build_model,
    build_regression,
};
pub use constants::{
    fully_linear_constants, fully_quadratic_constants, FullyLinearConstants, FullyQuadraticConstants,
};
pub use set::{
    linear_stencil, natural_basis, plus_minus_stencil, quadratic_basis_len, structured_quadratic_stencil,
    BasisKind, InterpolationSet,
};
pub use system::{assemble_matrix, InterpSystem, COND_MAX, RANK_TOL};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::{ensure_dim, ensure_finite_mat, ensure_finite_vec, ensure_square, symmetrize, Matrix, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    Linear,
    FullQuadratic,
    MinFrobenius,
    MinChangeFrobenius,
    Regression,
    Composite,
}

/// `m(y) = c + gᵀ(y − x) + ½(y − x)ᵀH(y − x)` around the base point `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticModel {
    pub x: Vector,
    pub c: f64,
    pub g: Vector,
    /// Always stored symmetric.
    pub h: Matrix,
    pub kind: ModelKind,
}

impl QuadraticModel {
    pub fn new(x: Vector, c: f64, g: Vector, h: Matrix, kind: ModelKind) -> Result<Self> {
        let n = x.len();
        ensure_dim(&g, n)?;
        ensure_square(&h, n)?;
        ensure_finite_vec(&x, "model base point")?;
        ensure_finite_vec(&g, "model gradient")?;
        ensure_finite_mat(&h, "model Hessian")?;
        if !c.is_finite() {
            return Err(crate::error::DfoError::NonFinite { what: "model constant" });
        }
        Ok(QuadraticModel { x, c, g, h: symmetrize(&h), kind })
    }

    pub fn dimension(&self) -> usize {
        self.x.len()
    }

    pub fn evaluate(&self, y: &Vector) -> f64 {
        let d = y - &self.x;
        self.c + self.g.dot(&d) + 0.5 * d.dot(&(&self.h * &d))
    }

    pub fn gradient(&self, y: &Vector) -> Vector {
        &self.g + &self.h * (y - &self.x)
    }

    /// The same polynomial with all coefficients negated.
    pub fn negated(&self) -> QuadraticModel {
        QuadraticModel { x: self.x.clone(), c: -self.c, g: -&self.g, h: -&self.h, kind: self.kind }
    }

    /// The same polynomial re-expanded around a new base point.
    pub fn recentered(&self, x_new: &Vector) -> QuadraticModel {
        QuadraticModel {
            x: x_new.clone(),
            c: self.evaluate(x_new),
            g: self.gradient(x_new),
            h: self.h.clone(),
            kind: self.kind,
        }
    }
}
