//! Lagrange polynomials, poisedness estimates and geometry management of interpolation sets.

mod improve;
mod lagrange;
mod poisedness;
pub mod sampling;

pub use improve::{
    det_update_check, improve_geometry, init_feasible_set, swap_point, ImprovedGeometry, SwapRecord,
    DET_CHECK_SLACK, MAX_SWAPS, MIN_REPLACEMENT_VALUE,
};
pub use lagrange::{lagrange_basis, lambda_at, LagrangeBasis};
pub use poisedness::{estimate_poisedness, PoisednessReport};
pub(crate) use poisedness::ball_witnesses;
