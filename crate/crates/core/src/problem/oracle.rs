//! Zeroth-order objective oracles with evaluation accounting and noise modes.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{DfoError, Result};
use crate::linalg::{ensure_dim, ensure_finite_vec, Vector};

pub type ObjectiveFn = Arc<dyn Fn(&Vector) -> f64 + Send + Sync>;
pub type ResidualFn = Arc<dyn Fn(&Vector) -> Vector + Send + Sync>;

/// How oracle values relate to the underlying smooth objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NoiseMode {
    Exact,
    /// `f(x) + eps_f * cos(phi(x))` with `phi` a fixed hash of the coordinates and `phase`.
    BoundedDeterministic { eps_f: f64, phase: u64 },
    /// `f(x) + sigma * Z` with `Z` standard normal drawn from a caller-supplied stream.
    Stochastic { sigma: f64 },
}

/// Reproducible random stream used for stochastic evaluations.
///
/// Streams are addressed by `(seed, stream_id)`; distinct ids give independent sequences.
#[derive(Clone)]
pub struct SampleStream {
    rng: ChaCha8Rng,
    id: u64,
}

impl SampleStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        SampleStream { rng, id: stream_id }
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }
}

impl fmt::Debug for SampleStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SampleStream").field("id", &self.id).finish()
    }
}

/// Objective oracle: a smooth function plus an optional residual map, a noise mode,
/// and a thread-safe evaluation counter.
pub struct ObjectiveOracle {
    n: usize,
    func: ObjectiveFn,
    residuals: Option<ResidualFn>,
    mode: NoiseMode,
    counter: AtomicU64,
}

impl fmt::Debug for ObjectiveOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ObjectiveOracle")
            .field("n", &self.n)
            .field("mode", &self.mode)
            .field("residuals", &self.residuals.is_some())
            .field("evaluations", &self.evaluations())
            .finish()
    }
}

impl ObjectiveOracle {
    /// Exact oracle for `f`.
    pub fn new(n: usize, f: impl Fn(&Vector) -> f64 + Send + Sync + 'static) -> Self {
        ObjectiveOracle {
            n,
            func: Arc::new(f),
            residuals: None,
            mode: NoiseMode::Exact,
            counter: AtomicU64::new(0),
        }
    }

    /// Exact oracle from shared closures; `f` is used as given even when residuals are present.
    pub fn from_parts(n: usize, func: ObjectiveFn, residuals: Option<ResidualFn>) -> Self {
        ObjectiveOracle { n, func, residuals, mode: NoiseMode::Exact, counter: AtomicU64::new(0) }
    }

    /// Exact oracle for `f(x) = ½‖r(x)‖²` that also exposes the residual vector.
    pub fn least_squares(n: usize, r: impl Fn(&Vector) -> Vector + Send + Sync + 'static) -> Self {
        let r: ResidualFn = Arc::new(r);
        let r2 = Arc::clone(&r);
        ObjectiveOracle {
            n,
            func: Arc::new(move |x: &Vector| 0.5 * r2(x).norm_squared()),
            residuals: Some(r),
            mode: NoiseMode::Exact,
            counter: AtomicU64::new(0),
        }
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn mode(&self) -> NoiseMode {
        self.mode
    }

    pub fn has_residuals(&self) -> bool {
        self.residuals.is_some()
    }

    /// Number of oracle calls since construction or the last reset.
    pub fn evaluations(&self) -> u64 {
        self.counter.load(Ordering::Relaxed)
    }

    pub fn reset_counter(&self) {
        self.counter.store(0, Ordering::Relaxed);
    }

    /// Noise-free objective value; not counted as an evaluation.
    pub fn true_value(&self, x: &Vector) -> f64 {
        (self.func)(x)
    }

    fn check_point(&self, x: &Vector) -> Result<()> {
        ensure_dim(x, self.n)?;
        ensure_finite_vec(x, "evaluation point")
    }

    fn finite(v: f64) -> Result<f64> {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(DfoError::NonFinite { what: "objective value" })
        }
    }

    /// Evaluate in `Exact` or `BoundedDeterministic` mode.
    ///
    /// Stochastic oracles need a stream; use [`ObjectiveOracle::sample`].
    pub fn evaluate(&self, x: &Vector) -> Result<f64> {
        self.check_point(x)?;
        let base = match self.mode {
            NoiseMode::Exact => (self.func)(x),
            NoiseMode::BoundedDeterministic { eps_f, phase } => {
                (self.func)(x) + eps_f * hash_angle(x, phase).cos()
            }
            NoiseMode::Stochastic { .. } => {
                return Err(DfoError::config("stochastic oracle requires a sample stream"))
            }
        };
        self.counter.fetch_add(1, Ordering::Relaxed);
        Self::finite(base)
    }

    /// Evaluate in any mode; stochastic draws come from `stream`.
    pub fn sample(&self, x: &Vector, stream: &mut SampleStream) -> Result<f64> {
        match self.mode {
            NoiseMode::Stochastic { sigma } => {
                self.check_point(x)?;
                let z = stream.standard_normal();
                self.counter.fetch_add(1, Ordering::Relaxed);
                Self::finite((self.func)(x) + sigma * z)
            }
            _ => self.evaluate(x),
        }
    }

    /// Residual vector at `x` (counts as one evaluation). Exact mode only.
    pub fn residuals(&self, x: &Vector) -> Result<Vector> {
        self.check_point(x)?;
        let r = self
            .residuals
            .as_ref()
            .ok_or_else(|| DfoError::config("oracle has no residual map"))?;
        if self.mode != NoiseMode::Exact {
            return Err(DfoError::config("residual evaluations are only available in exact mode"));
        }
        let v = r(x);
        self.counter.fetch_add(1, Ordering::Relaxed);
        ensure_finite_vec(&v, "residual vector")?;
        Ok(v)
    }
}

/// A new oracle sharing `base`'s function with the given noise mode and a fresh counter.
pub fn make_noisy_oracle(base: &ObjectiveOracle, mode: NoiseMode) -> Result<ObjectiveOracle> {
    match mode {
        NoiseMode::BoundedDeterministic { eps_f, .. } if !(eps_f >= 0.0 && eps_f.is_finite()) => {
            return Err(DfoError::config("eps_f must be finite and nonnegative"))
        }
        NoiseMode::Stochastic { sigma } if !(sigma >= 0.0 && sigma.is_finite()) => {
            return Err(DfoError::config("sigma must be finite and nonnegative"))
        }
        _ => {}
    }
    Ok(ObjectiveOracle {
        n: base.n,
        func: Arc::clone(&base.func),
        residuals: base.residuals.clone(),
        mode,
        counter: AtomicU64::new(0),
    })
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic angle in `[0, 2π)` derived from the bit patterns of the coordinates.
fn hash_angle(x: &Vector, phase: u64) -> f64 {
    let mut h = splitmix64(phase);
    for v in x.iter() {
        // Treat -0.0 and 0.0 as the same point.
        let bits = if *v == 0.0 { 0u64 } else { v.to_bits() };
        h = splitmix64(h ^ bits);
    }
    (h >> 11) as f64 / (1u64 << 53) as f64 * std::f64::consts::TAU
}
