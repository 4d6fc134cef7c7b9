use crate::error::Result;
use crate::linalg::{unit, Vector};
use crate::model::{InterpSystem, InterpolationSet, QuadraticModel};

/// Lagrange polynomials of an interpolation set, sharing one factorized system.
#[derive(Debug, Clone)]
pub struct LagrangeBasis {
    pub set: InterpolationSet,
    pub system: InterpSystem,
    /// `ℓᵢ` expanded around the set's base point.
    pub polys: Vec<QuadraticModel>,
}

/// Builds all `p` Lagrange polynomials of `set`.
pub fn lagrange_basis(set: &InterpolationSet) -> Result<LagrangeBasis> {
    let system = InterpSystem::assemble(set)?;
    let p = set.p();
    let polys = (0..p)
        .map(|i| system.model(set, &unit(p, i), None))
        .collect::<Result<Vec<_>>>()?;
    Ok(LagrangeBasis { set: set.clone(), system, polys })
}

/// Values `[ℓ₁(y), …, ℓ_p(y)]` from a single transposed solve.
pub fn lambda_at(basis: &LagrangeBasis, y: &Vector) -> Vector {
    basis.lambda_at(y)
}

impl LagrangeBasis {
    pub fn p(&self) -> usize {
        self.polys.len()
    }

    pub fn lambda_at(&self, y: &Vector) -> Vector {
        self.system.lagrange_values_scaled(&self.set.scale_point(y))
    }

    pub fn value(&self, i: usize, y: &Vector) -> f64 {
        self.polys[i].evaluate(y)
    }
}
