//! Seeded random streams and Pareto-distributed vertex qualities.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pareto law with density `γ a^γ / x^(γ+1)` on `x > a`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParetoParams {
    gamma: f64,
    a: f64,
}

impl ParetoParams {
    pub fn new(gamma: f64, a: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 1.0) {
            return Err(Error::invalid("gamma", format!("must be > 1, got {gamma}")));
        }
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::invalid("a", format!("must be > 0, got {a}")));
        }
        Ok(Self { gamma, a })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// Inverse CDF. `u` must lie in `[0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        self.a * (1.0 - u).powf(-1.0 / self.gamma)
    }

    /// `E[ζ] = γa/(γ−1)`.
    pub fn mean(&self) -> f64 {
        self.gamma * self.a / (self.gamma - 1.0)
    }

    /// `P(ζ > x)`.
    pub fn survival(&self, x: f64) -> f64 {
        if x <= self.a {
            1.0
        } else {
            (self.a / x).powf(self.gamma)
        }
    }
}

/// Identifies one reproducible random stream: a master seed plus the
/// replica index.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    #[serde(default)]
    pub stream_id: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self {
            master_seed,
            stream_id,
        }
    }

    pub fn with_stream(self, stream_id: u64) -> Self {
        Self { stream_id, ..self }
    }
}

/// A sequential source of uniform draws in `[0, 1)`.
///
/// Backed by ChaCha8 keyed on the master seed, with the replica index
/// selecting the cipher stream, so replicas never share state.
#[derive(Clone, Debug)]
pub struct RandomStream {
    rng: ChaCha8Rng,
}

impl RandomStream {
    /// Next uniform draw in `[0, 1)` with 53 bits of precision.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }
}

pub fn derive_stream(seed: SeedSpec) -> RandomStream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.master_seed);
    rng.set_stream(seed.stream_id);
    RandomStream { rng }
}

/// Draws one quality by CDF inversion: `a·(1−u)^(−1/γ)`.
#[inline]
pub fn pareto_sample(stream: &mut RandomStream, p: &ParetoParams) -> f64 {
    p.quantile(stream.uniform())
}

pub fn pareto_mean(gamma: f64, a: f64) -> Result<f64> {
    Ok(ParetoParams::new(gamma, a)?.mean())
}
