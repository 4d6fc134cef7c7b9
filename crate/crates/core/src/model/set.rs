use serde::{Deserialize, Serialize};

use crate::error::{DfoError, Result};
use crate::linalg::{ensure_dim, ensure_finite_vec, unit, Vector};

/// Polynomial space an interpolation set is built for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BasisKind {
    Linear,
    FullQuadratic,
    MinFrobenius,
    Regression,
}

/// Dimension of the space of quadratics in `n` variables.
pub fn quadratic_basis_len(n: usize) -> usize {
    (n + 1) * (n + 2) / 2
}

impl BasisKind {
    /// Allowed range of point counts for dimension `n`.
    pub fn point_range(self, n: usize) -> (usize, usize) {
        let q = quadratic_basis_len(n);
        match self {
            BasisKind::Linear => (n + 1, n + 1),
            BasisKind::FullQuadratic => (q, q),
            BasisKind::MinFrobenius => (n + 2, q),
            BasisKind::Regression => (n + 2, usize::MAX),
        }
    }

    /// Canonical stencil for this basis around `x`.
    pub fn canonical_stencil(self, x: &Vector, delta: f64) -> Vec<Vector> {
        match self {
            BasisKind::Linear => linear_stencil(x, delta),
            BasisKind::FullQuadratic => structured_quadratic_stencil(x, delta),
            BasisKind::MinFrobenius | BasisKind::Regression => plus_minus_stencil(x, delta),
        }
    }
}

/// `{x, x + Δe₁, …, x + Δeₙ}`.
pub fn linear_stencil(x: &Vector, delta: f64) -> Vec<Vector> {
    let n = x.len();
    std::iter::once(x.clone()).chain((0..n).map(|i| x + unit(n, i) * delta)).collect()
}

/// `{x, x + Δeᵢ, x − Δeᵢ}` with all `+` points before all `−` points.
pub fn plus_minus_stencil(x: &Vector, delta: f64) -> Vec<Vector> {
    let n = x.len();
    let mut pts = linear_stencil(x, delta);
    pts.extend((0..n).map(|i| x - unit(n, i) * delta));
    pts
}

/// `{x, x ± Δeᵢ, x + Δ(eᵢ + eⱼ)}` with the pairs `i < j` in lexicographic order.
pub fn structured_quadratic_stencil(x: &Vector, delta: f64) -> Vec<Vector> {
    let n = x.len();
    let mut pts = plus_minus_stencil(x, delta);
    for i in 0..n {
        for j in i + 1..n {
            pts.push(x + (unit(n, i) + unit(n, j)) * delta);
        }
    }
    pts
}

/// Natural quadratic basis `[1, s, ½s₁², s₁s₂, …, s₁sₙ, ½s₂², …, ½sₙ²]`.
///
/// Quadratic terms follow the row-major upper triangle of the Hessian.
pub fn natural_basis(s: &Vector) -> Vector {
    let n = s.len();
    let mut phi = Vec::with_capacity(quadratic_basis_len(n));
    phi.push(1.0);
    phi.extend(s.iter().copied());
    for i in 0..n {
        for j in i..n {
            phi.push(if i == j { 0.5 * s[i] * s[i] } else { s[i] * s[j] });
        }
    }
    Vector::from_vec(phi)
}

/// Ordered interpolation points with a base point, a scaling radius and a basis kind.
#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationSet {
    points: Vec<Vector>,
    x: Vector,
    delta: f64,
    kind: BasisKind,
}

impl InterpolationSet {
    pub fn new(x: Vector, delta: f64, points: Vec<Vector>, kind: BasisKind) -> Result<Self> {
        let n = x.len();
        if n == 0 {
            return Err(DfoError::config("dimension must be positive"));
        }
        ensure_finite_vec(&x, "base point")?;
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(DfoError::config(format!("interpolation radius must be positive, got {delta}")));
        }
        let (min, max) = kind.point_range(n);
        if points.len() < min || points.len() > max {
            return Err(DfoError::InvalidPointCount { n, got: points.len(), min, max });
        }
        for y in &points {
            ensure_dim(y, n)?;
            ensure_finite_vec(y, "interpolation point")?;
        }
        Ok(InterpolationSet { points, x, delta, kind })
    }

    /// Canonical stencil of `kind` around `x` with radius `delta`.
    pub fn canonical(x: &Vector, delta: f64, kind: BasisKind) -> Result<Self> {
        InterpolationSet::new(x.clone(), delta, kind.canonical_stencil(x, delta), kind)
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn p(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[Vector] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &Vector {
        &self.points[i]
    }

    pub fn base(&self) -> &Vector {
        &self.x
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    /// Scaled displacement `(yᵢ − x)/Δ`.
    pub fn scaled(&self, i: usize) -> Vector {
        (&self.points[i] - &self.x) / self.delta
    }

    /// Scaled displacement of an arbitrary point.
    pub fn scale_point(&self, y: &Vector) -> Vector {
        (y - &self.x) / self.delta
    }

    /// `max ‖yᵢ − x‖ / Δ`.
    pub fn beta(&self) -> f64 {
        self.points.iter().map(|y| (y - &self.x).norm()).fold(0.0, f64::max) / self.delta
    }

    /// Index of a point equal to the base point, if any.
    pub fn base_index(&self) -> Option<usize> {
        self.points.iter().position(|y| *y == self.x)
    }

    /// Copy with point `i` replaced by `y`.
    pub fn with_point(&self, i: usize, y: Vector) -> Result<Self> {
        ensure_dim(&y, self.n())?;
        ensure_finite_vec(&y, "interpolation point")?;
        let mut out = self.clone();
        out.points[i] = y;
        Ok(out)
    }

    /// Copy with a new base point and scaling radius; the points are kept.
    pub fn rebased(&self, x: Vector, delta: f64) -> Result<Self> {
        InterpolationSet::new(x, delta, self.points.clone(), self.kind)
    }
}
