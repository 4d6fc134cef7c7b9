//! Named test problems used by the benchmark harness and the regression suites.

use std::fmt;
use std::sync::Arc;

use crate::error::{DfoError, Result};
use crate::linalg::{Matrix, Vector};

use super::feasible::FeasibleSet;
use super::oracle::{ObjectiveFn, ObjectiveOracle, ResidualFn};

pub type GradientFn = Arc<dyn Fn(&Vector) -> Vector + Send + Sync>;
pub type HessianFn = Arc<dyn Fn(&Vector) -> Matrix + Send + Sync>;

/// A benchmark problem: objective, optional derivatives, constraints and known solution data.
#[derive(Clone)]
pub struct ProblemSpec {
    pub name: &'static str,
    pub n: usize,
    pub objective: ObjectiveFn,
    pub residuals: Option<ResidualFn>,
    pub gradient: Option<GradientFn>,
    pub hessian: Option<HessianFn>,
    /// Lipschitz constant of the gradient when known analytically.
    pub lipschitz_grad: Option<f64>,
    pub feasible: FeasibleSet,
    pub x0: Vector,
    pub x_star: Option<Vector>,
    pub f_star: Option<f64>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("feasible", &self.feasible)
            .field("x0", &self.x0.as_slice())
            .finish()
    }
}

impl ProblemSpec {
    /// Fresh exact oracle with its own evaluation counter.
    pub fn oracle(&self) -> ObjectiveOracle {
        ObjectiveOracle::from_parts(self.n, Arc::clone(&self.objective), self.residuals.clone())
    }

    pub fn value(&self, x: &Vector) -> f64 {
        (self.objective)(x)
    }

    pub fn grad(&self, x: &Vector) -> Option<Vector> {
        self.gradient.as_ref().map(|g| g(x))
    }

    /// Largest deviation between the analytic gradient and central differences at `x0`.
    ///
    /// Returns `Ok(None)` for problems without a gradient.
    pub fn gradient_self_test(&self) -> Result<Option<f64>> {
        let Some(grad) = &self.gradient else { return Ok(None) };
        let g = grad(&self.x0);
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            let h = 1e-6 * (1.0 + self.x0[i].abs());
            let mut xp = self.x0.clone();
            let mut xm = self.x0.clone();
            xp[i] += h;
            xm[i] -= h;
            let fd = (self.value(&xp) - self.value(&xm)) / (2.0 * h);
            worst = worst.max((fd - g[i]).abs() / (1.0 + g[i].abs()));
        }
        if worst > 1e-5 {
            return Err(DfoError::config(format!(
                "gradient of problem {} disagrees with central differences ({worst:e})",
                self.name
            )));
        }
        Ok(Some(worst))
    }
}

fn bowl(name: &'static str, n: usize) -> ProblemSpec {
    ProblemSpec {
        name,
        n,
        objective: Arc::new(|x: &Vector| 0.5 * x.norm_squared()),
        residuals: None,
        gradient: Some(Arc::new(|x: &Vector| x.clone())),
        hessian: Some(Arc::new(move |_x: &Vector| Matrix::identity(n, n))),
        lipschitz_grad: Some(1.0),
        feasible: FeasibleSet::WholeSpace,
        x0: Vector::from_element(n, 1.0),
        x_star: Some(Vector::zeros(n)),
        f_star: Some(0.0),
    }
}

fn illcond(n: usize) -> ProblemSpec {
    // Eigenvalues log-spaced over [1, 1e3].
    let d = Vector::from_iterator(
        n,
        (0..n).map(|i| 10f64.powf(3.0 * i as f64 / (n.max(2) - 1) as f64)),
    );
    let (d1, d2, d3) = (d.clone(), d.clone(), d.clone());
    ProblemSpec {
        name: "illcond5",
        n,
        objective: Arc::new(move |x: &Vector| 0.5 * x.component_mul(x).dot(&d1)),
        residuals: None,
        gradient: Some(Arc::new(move |x: &Vector| x.component_mul(&d2))),
        hessian: Some(Arc::new(move |_x: &Vector| Matrix::from_diagonal(&d3))),
        lipschitz_grad: Some(d.max()),
        feasible: FeasibleSet::WholeSpace,
        x0: Vector::from_element(n, 1.0),
        x_star: Some(Vector::zeros(n)),
        f_star: Some(0.0),
    }
}

fn rosenbrock() -> ProblemSpec {
    ProblemSpec {
        name: "rosenbrock2",
        n: 2,
        objective: Arc::new(|x: &Vector| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2)),
        residuals: None,
        gradient: Some(Arc::new(|x: &Vector| {
            let t = x[1] - x[0] * x[0];
            Vector::from_vec(vec![-400.0 * x[0] * t - 2.0 * (1.0 - x[0]), 200.0 * t])
        })),
        hessian: Some(Arc::new(|x: &Vector| {
            Matrix::from_row_slice(
                2,
                2,
                &[1200.0 * x[0] * x[0] - 400.0 * x[1] + 2.0, -400.0 * x[0], -400.0 * x[0], 200.0],
            )
        })),
        lipschitz_grad: None,
        feasible: FeasibleSet::WholeSpace,
        x0: Vector::from_vec(vec![-1.2, 1.0]),
        x_star: Some(Vector::from_vec(vec![1.0, 1.0])),
        f_star: Some(0.0),
    }
}

fn rosenbrock_ls() -> ProblemSpec {
    let r: ResidualFn = Arc::new(|x: &Vector| Vector::from_vec(vec![10.0 * (x[1] - x[0] * x[0]), 1.0 - x[0]]));
    let r2 = Arc::clone(&r);
    ProblemSpec {
        name: "rosenbrock-ls2",
        n: 2,
        objective: Arc::new(move |x: &Vector| 0.5 * r2(x).norm_squared()),
        residuals: Some(r),
        gradient: Some(Arc::new(|x: &Vector| {
            let t = x[1] - x[0] * x[0];
            Vector::from_vec(vec![-200.0 * x[0] * t - (1.0 - x[0]), 100.0 * t])
        })),
        hessian: None,
        lipschitz_grad: None,
        feasible: FeasibleSet::WholeSpace,
        x0: Vector::from_vec(vec![-1.2, 1.0]),
        x_star: Some(Vector::from_vec(vec![1.0, 1.0])),
        f_star: Some(0.0),
    }
}

fn box_shifted() -> ProblemSpec {
    ProblemSpec {
        name: "box-shifted2",
        n: 2,
        objective: Arc::new(|x: &Vector| (x[0] + 1.0).powi(2) + (x[1] + 1.0).powi(2)),
        residuals: None,
        gradient: Some(Arc::new(|x: &Vector| Vector::from_vec(vec![2.0 * (x[0] + 1.0), 2.0 * (x[1] + 1.0)]))),
        hessian: Some(Arc::new(|_x: &Vector| Matrix::identity(2, 2) * 2.0)),
        lipschitz_grad: Some(2.0),
        feasible: FeasibleSet::Box { lower: vec![0.0, 0.0], upper: vec![f64::INFINITY, f64::INFINITY] },
        x0: Vector::from_vec(vec![1.0, 1.0]),
        x_star: Some(Vector::zeros(2)),
        f_star: Some(2.0),
    }
}

/// Half-width of the slab in `slab2`.
pub const SLAB_HALF_WIDTH: f64 = 0.1;

fn slab() -> ProblemSpec {
    let w = SLAB_HALF_WIDTH;
    ProblemSpec {
        name: "slab2",
        n: 2,
        objective: Arc::new(|x: &Vector| (x[0] - 1.0).powi(2) + (x[1] - 1.0).powi(2)),
        residuals: None,
        gradient: Some(Arc::new(|x: &Vector| Vector::from_vec(vec![2.0 * (x[0] - 1.0), 2.0 * (x[1] - 1.0)]))),
        hessian: Some(Arc::new(|_x: &Vector| Matrix::identity(2, 2) * 2.0)),
        lipschitz_grad: Some(2.0),
        feasible: FeasibleSet::Box { lower: vec![f64::NEG_INFINITY, -w], upper: vec![f64::INFINITY, w] },
        x0: Vector::zeros(2),
        x_star: Some(Vector::from_vec(vec![1.0, w])),
        f_star: Some((1.0 - w) * (1.0 - w)),
    }
}

/// Names accepted by [`lookup`], in registry order.
pub const PROBLEM_NAMES: &[&str] =
    &["bowl2", "bowl5", "illcond5", "rosenbrock2", "rosenbrock-ls2", "box-shifted2", "slab2"];

/// All registered problems.
pub fn registry() -> Vec<ProblemSpec> {
    PROBLEM_NAMES.iter().map(|n| lookup(n).expect("registered name")).collect()
}

/// Problem by name; unknown names list the valid options.
pub fn lookup(name: &str) -> Result<ProblemSpec> {
    Ok(match name {
        "bowl2" => bowl("bowl2", 2),
        "bowl5" => bowl("bowl5", 5),
        "illcond5" => illcond(5),
        "rosenbrock2" => rosenbrock(),
        "rosenbrock-ls2" => rosenbrock_ls(),
        "box-shifted2" => box_shifted(),
        "slab2" => slab(),
        _ => {
            return Err(DfoError::config(format!(
                "unknown problem '{name}'; valid options: {}",
                PROBLEM_NAMES.join(", ")
            )))
        }
    })
}
