//! Sample averaging and Chebyshev sample sizes for stochastic oracles.

use serde::{Deserialize, Serialize};

use crate::error::{DfoError, Result};
use crate::linalg::Vector;
use crate::problem::{ObjectiveOracle, SampleStream};

/// Upper clamp of [`required_samples`].
pub const MAX_SAMPLES: u64 = 10_000_000;

/// Mean of repeated oracle draws at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleEstimate {
    pub mean: f64,
    pub n_samples: u64,
    /// Unbiased sample variance; zero for a single draw.
    pub sample_variance: f64,
    pub stream_id: u64,
}

/// Average of `n` draws of the oracle at `x` taken from `stream`.
pub fn sample_average(oracle: &ObjectiveOracle, x: &Vector, n: u64, stream: &mut SampleStream) -> Result<SampleEstimate> {
    if n == 0 {
        return Err(DfoError::config("sample count must be at least 1"));
    }
    // Welford's update; summation order is fixed so results are reproducible.
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for k in 1..=n {
        let v = oracle.sample(x, stream)?;
        let d = v - mean;
        mean += d / k as f64;
        m2 += d * (v - mean);
    }
    let sample_variance = if n > 1 { m2 / (n - 1) as f64 } else { 0.0 };
    Ok(SampleEstimate { mean, n_samples: n, sample_variance, stream_id: stream.id() })
}

/// Chebyshev sample size `⌈σ²/(ε_f²(1−α)Δ⁴)⌉`, clamped to `[1, MAX_SAMPLES]`.
///
/// The ceiling ignores relative excess below 1e-12 so that exact products are not
/// pushed up by rounding.
pub fn required_samples(sigma: f64, eps_f: f64, alpha: f64, delta: f64) -> Result<u64> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(DfoError::config(format!("sigma must be finite and nonnegative, got {sigma}")));
    }
    if !(eps_f > 0.0 && eps_f.is_finite()) {
        return Err(DfoError::config(format!("eps_f must be positive, got {eps_f}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(DfoError::config(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(DfoError::config(format!("delta must be positive, got {delta}")));
    }
    let v = sigma * sigma / (eps_f * eps_f * (1.0 - alpha) * delta.powi(4));
    let n = (v * (1.0 - 1e-12)).ceil();
    if n > MAX_SAMPLES as f64 {
        log::warn!("required sample count {n:e} clamped to {MAX_SAMPLES}");
        return Ok(MAX_SAMPLES);
    }
    Ok((n as u64).max(1))
}

/// Independent stream number `counter` derived from a master seed.
pub fn stream_for(master_seed: u64, counter: u64) -> SampleStream {
    SampleStream::new(master_seed, counter)
}
