//! Objective oracles, feasible sets and the named problem registry.

pub mod feasible;
pub mod oracle;
pub mod registry;

pub use feasible::{dykstra, project_ball, FeasibleSet};
pub use oracle::{make_noisy_oracle, NoiseMode, ObjectiveOracle, SampleStream};
pub use registry::{lookup, registry, ProblemSpec, PROBLEM_NAMES};

use crate::error::Result;
use crate::linalg::Vector;

/// Euclidean projection of `x` onto `set`.
pub fn project(set: &FeasibleSet, x: &Vector) -> Result<Vector> {
    set.project(x)
}
