//! Dense linear-algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{DfoError, Result};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Infinity norm (maximum absolute row sum).
pub fn inf_norm(m: &Matrix) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Returns `(m + mᵀ)/2`.
pub fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

/// Eigen-decomposition of a symmetric matrix with eigenvalues sorted ascending.
pub struct SortedEigen {
    pub values: Vector,
    pub vectors: Matrix,
}

pub fn sorted_eigen(h: &Matrix) -> SortedEigen {
    let n = h.nrows();
    if n == 0 {
        return SortedEigen { values: Vector::zeros(0), vectors: Matrix::zeros(0, 0) };
    }
    let eig = SymmetricEigen::new(symmetrize(h));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = Vector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = Matrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(i));
    }
    SortedEigen { values, vectors }
}

/// Smallest eigenvalue and a unit eigenvector of a symmetric matrix.
pub fn min_eigenpair(h: &Matrix) -> (f64, Vector) {
    let e = sorted_eigen(h);
    (e.values[0], e.vectors.column(0).into_owned())
}

/// Spectral norm of a symmetric matrix.
pub fn sym_norm2(h: &Matrix) -> f64 {
    if h.nrows() == 0 {
        return 0.0;
    }
    let e = sorted_eigen(h);
    e.values[0].abs().max(e.values[e.values.len() - 1].abs())
}

pub fn ensure_finite_vec(v: &Vector, what: &'static str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(DfoError::NonFinite { what })
    }
}

pub fn ensure_finite_mat(m: &Matrix, what: &'static str) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(DfoError::NonFinite { what })
    }
}

pub fn ensure_dim(v: &Vector, n: usize) -> Result<()> {
    if v.len() == n {
        Ok(())
    } else {
        Err(DfoError::DimensionMismatch { expected: n, got: v.len() })
    }
}

pub fn ensure_square(m: &Matrix, n: usize) -> Result<()> {
    if m.nrows() != n {
        return Err(DfoError::DimensionMismatch { expected: n, got: m.nrows() });
    }
    if m.ncols() != n {
        return Err(DfoError::DimensionMismatch { expected: n, got: m.ncols() });
    }
    Ok(())
}

/// Inverse and determinant of a square matrix via a fully pivoted LU factorization.
pub fn inverse_and_det(a: &Matrix) -> Option<(Matrix, f64)> {
    let lu = a.clone().full_piv_lu();
    let det = lu.determinant();
    let inv = lu.try_inverse()?;
    if inv.iter().all(|v| v.is_finite()) {
        Some((inv, det))
    } else {
        None
    }
}

pub fn determinant(a: &Matrix) -> f64 {
    a.clone().full_piv_lu().determinant()
}

/// Unit coordinate vector.
pub fn unit(n: usize, i: usize) -> Vector {
    let mut e = Vector::zeros(n);
    e[i] = 1.0;
    e
}

/// Roots `tau` of `‖s + tau d‖ = radius`, returned as `(negative_root, positive_root)`.
///
/// Requires `‖s‖ ≤ radius` and `d ≠ 0`.
pub fn boundary_roots(s: &Vector, d: &Vector, radius: f64) -> (f64, f64) {
    let a = d.dot(d);
    let b = 2.0 * s.dot(d);
    let c = (s.dot(s) - radius * radius).min(0.0);
    let disc = (b * b - 4.0 * a * c).max(0.0).sqrt();
    // Numerically stable pair of roots.
    let q = -0.5 * (b + b.signum() * disc);
    let (r1, r2) = if q == 0.0 { (0.0, 0.0) } else { (q / a, c / q) };
    (r1.min(r2), r1.max(r2))
}
