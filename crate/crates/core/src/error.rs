//! Error type shared by every module of the crate.

use thiserror::Error;

use crate::trs::TrsSolution;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, DfoError>;

/// Failure modes of the solvers, model builders and drivers.
#[derive(Debug, Clone, Error)]
pub enum DfoError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {what}")]
    NonFinite { what: &'static str },

    #[error("{what} did not converge within {iters} iterations")]
    NonConvergence { what: &'static str, iters: usize },

    #[error("interpolation system is singular or ill-conditioned (condition estimate {cond:e})")]
    SingularSystem { cond: f64 },

    #[error("regression matrix is rank deficient (singular value ratio {ratio:e})")]
    RankDeficient { ratio: f64 },

    #[error("invalid number of interpolation points: {got} (allowed {min}..={max}) for n = {n}")]
    InvalidPointCount { n: usize, got: usize, min: usize, max: usize },

    #[error("could not factorize H + lambda I for any trial lambda (last lambda {lambda:e})")]
    FactorizationFailure { lambda: f64 },

    #[error("Hessian has no negative curvature (smallest eigenvalue {lambda_min:e})")]
    NoNegativeCurvature { lambda_min: f64 },

    #[error("iteration limit reached before convergence; best iterate returned")]
    MaxItersExceeded { best: Box<TrsSolution> },

    #[error("projected-gradient backtracking found no step meeting the decrease bound")]
    LineSearchFailure,

    #[error("geometry improvement exceeded {cap} swaps")]
    IterationCap { cap: usize },

    #[error("no feasible replacement with nonzero Lagrange value for point {index}")]
    NoFeasibleReplacement { index: usize },

    #[error("starting point is not feasible")]
    InfeasibleStart,

    #[error("determinant update check failed: ratio {ratio:e}, expected at least {bound:e}")]
    DeterminantCheck { ratio: f64, bound: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("reports refer to different problems: {0} and {1}")]
    MixedProblems(String, String),
}

impl DfoError {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        DfoError::Config(msg.into())
    }
}
