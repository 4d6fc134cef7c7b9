//! Closed-form constants of the canonical interpolation stencils, checked numerically.

use std::fmt;

use dfokit::geometry::{estimate_poisedness, lagrange_basis};
use dfokit::linalg::Vector;
use dfokit::model::{BasisKind, InterpSystem, InterpolationSet};
use dfokit::Result;

/// Dimensions covered by [`verify_constants`].
pub const DIMENSIONS: [usize; 4] = [2, 3, 5, 10];

#[derive(Debug, Clone, PartialEq)]
pub struct ConstantCheck {
    pub name: String,
    pub n: usize,
    pub expected: String,
    pub measured: f64,
    pub pass: bool,
}

fn check(name: &str, n: usize, expected: String, measured: f64, pass: bool) -> ConstantCheck {
    ConstantCheck { name: name.to_string(), n, expected, measured, pass }
}

fn canonical(n: usize, kind: BasisKind) -> Result<InterpolationSet> {
    InterpolationSet::canonical(&Vector::zeros(n), 1.0, kind)
}

fn lambda_inf(n: usize, kind: BasisKind) -> Result<f64> {
    let set = canonical(n, kind)?;
    Ok(estimate_poisedness(&lagrange_basis(&set)?, &Vector::zeros(n), 1.0, None)?.lambda_inf)
}

/// System norms and poisedness constants of the coordinate, `±` and structured quadratic stencils.
pub fn verify_constants() -> Result<Vec<ConstantCheck>> {
    let mut out = Vec::new();
    for n in DIMENSIONS {
        let nf = n as f64;
        let root = nf.sqrt();

        let v = InterpSystem::assemble(&canonical(n, BasisKind::Linear)?)?.inv_norm_inf;
        out.push(check("linear ‖M⁻¹‖∞", n, "≤ 2".into(), v, v <= 2.0));
        let v = InterpSystem::assemble(&canonical(n, BasisKind::Regression)?)?.inv_norm_inf;
        out.push(check("regression ‖M†‖∞", n, "= 1".into(), v, (v - 1.0).abs() <= 1e-10));
        let v = InterpSystem::assemble(&canonical(n, BasisKind::MinFrobenius)?)?.inv_norm_inf;
        let target = (4 * n + 1) as f64;
        out.push(check("min-Frobenius ‖F⁻¹‖∞", n, format!("= {target}"), v, (v - target).abs() <= 1e-8));
        let v = InterpSystem::assemble(&canonical(n, BasisKind::FullQuadratic)?)?.inv_norm_inf;
        out.push(check("structured quadratic ‖Q⁻¹‖∞", n, "≤ 8".into(), v, v <= 8.0));

        let v = lambda_inf(n, BasisKind::Linear)?;
        out.push(check("linear Λ∞", n, format!("= {:.6}", root + 1.0), v, (v - root - 1.0).abs() <= 1e-6));
        let v = lambda_inf(n, BasisKind::MinFrobenius)?;
        out.push(check("min-Frobenius Λ∞", n, "= 1".into(), v, (v - 1.0).abs() <= 1e-6));
        let v = lambda_inf(n, BasisKind::FullQuadratic)?;
        let upper = 3f64.max(1.0 + (nf + 1.0) / 2.0);
        let lower = (nf - 5.0).abs() / 2.0;
        out.push(check("structured quadratic Λ∞", n, format!("≤ {upper}"), v, v <= upper));
        out.push(check("structured quadratic Λ∞", n, format!("≥ {lower}"), v, v >= lower));
    }
    Ok(out)
}

/// Pass/fail table for [`verify_constants`] output.
pub struct CheckTable<'a>(pub &'a [ConstantCheck]);

impl fmt::Display for CheckTable<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<30} {:>3} {:>12} {:>14}  result", "constant", "n", "expected", "measured")?;
        for c in self.0 {
            let mark = if c.pass { "PASS" } else { "FAIL" };
            writeln!(f, "{:<30} {:>3} {:>12} {:>14.8}  {mark}", c.name, c.n, c.expected, c.measured)?;
        }
        let passed = self.0.iter().filter(|c| c.pass).count();
        write!(f, "{passed} of {} checks passed", self.0.len())
    }
}
