//! Derivative-free trust-region optimization based on polynomial interpolation models.

pub mod drivers;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod model;
pub mod noise;
pub mod problem;
pub mod trs;

pub use error::{DfoError, Result};
