use serde::{Deserialize, Serialize};

use crate::error::{DfoError, Result};

use super::set::{BasisKind, InterpolationSet};
use super::system::InterpSystem;

/// Error constants of a fully linear model, plus the extra noise terms.
///
/// Value error ≤ `kappa_mf Δ² + kappa_mf_noise ε_f`, gradient error ≤ `kappa_mg Δ + kappa_mg_noise ε_f/Δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FullyLinearConstants {
    pub kappa_mf: f64,
    pub kappa_mg: f64,
    /// Model Hessian bound (zero for linear models).
    pub kappa_h: f64,
    pub kappa_mf_noise: f64,
    pub kappa_mg_noise: f64,
}

/// Error constants of a fully quadratic model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FullyQuadraticConstants {
    pub kappa_mf: f64,
    pub kappa_mg: f64,
    pub kappa_mh: f64,
}

/// Constants for linear, regression and min-Frobenius models given the gradient Lipschitz constant.
pub fn fully_linear_constants(
    set: &InterpolationSet,
    system: &InterpSystem,
    lipschitz_grad: f64,
) -> Result<FullyLinearConstants> {
    let n = set.n() as f64;
    let beta = set.beta();
    let l = lipschitz_grad;
    let root = 1.0 + n.sqrt();
    match system.kind {
        BasisKind::Linear | BasisKind::Regression => {
            let norm = system.inv_norm_inf;
            let kappa_mf = 0.5 * l * root * beta * beta * norm + 0.5 * l;
            let noise = root * norm;
            Ok(FullyLinearConstants {
                kappa_mf,
                kappa_mg: 2.0 * kappa_mf,
                kappa_h: 0.0,
                kappa_mf_noise: noise,
                kappa_mg_noise: 2.0 * noise,
            })
        }
        BasisKind::MinFrobenius => {
            let p = set.p() as f64;
            let kappa_h = 0.5 * l * p * beta.powi(4) * system.inv_norm_inf;
            let half = 0.5 * (l + kappa_h);
            let kappa_mf = half * root * beta * beta * system.linear_pinv_norm_inf + half;
            let noise = root * system.linear_pinv_norm_inf;
            Ok(FullyLinearConstants {
                kappa_mf,
                kappa_mg: 2.0 * kappa_mf + 2.0 * kappa_h,
                kappa_h,
                kappa_mf_noise: noise,
                kappa_mg_noise: 2.0 * noise,
            })
        }
        BasisKind::FullQuadratic => {
            Err(DfoError::config("fully quadratic systems use fully_quadratic_constants"))
        }
    }
}

/// Constants for a fully determined quadratic model given the Hessian Lipschitz constant.
pub fn fully_quadratic_constants(
    set: &InterpolationSet,
    system: &InterpSystem,
    lipschitz_hess: f64,
) -> Result<FullyQuadraticConstants> {
    if system.kind != BasisKind::FullQuadratic {
        return Err(DfoError::config("fully quadratic constants need a FullQuadratic system"));
    }
    let n = set.n() as f64;
    let l = lipschitz_hess;
    let core = l * (n + n.sqrt() + 1.5) * set.beta().powi(3) * system.inv_norm_inf;
    Ok(FullyQuadraticConstants {
        kappa_mf: core / 6.0 + l / 6.0,
        kappa_mg: 17.0 / 3.0 * core + l / 2.0,
        kappa_mh: 4.0 * core + l,
    })
}
