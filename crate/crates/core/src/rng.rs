//! Seeded symmetric stable variates via the Chambers-Mallows-Stuck transform.
//!
//! With `V ~ U(-pi/2, pi/2)` and `W ~ Exp(1)` independent,
//!
//! ```text
//! X = sin(alpha V) / cos(V)^(1/alpha) * (cos((1 - alpha) V) / W)^((1 - alpha) / alpha)
//! ```
//!
//! is standard symmetric stable; `alpha = 1` reduces to `tan(V)`. Draws come
//! from a ChaCha8 generator keyed by `(seed, stream_id)`, so any replication
//! of a simulation can be regenerated on its own.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use crate::ecf::Sample;
use crate::error::{Error, Result};
use crate::model::StableParams;

/// Indices this close to 1 use the Cauchy branch.
const CAUCHY_BAND: f64 = 1e-8;

/// Stream parameters for replication `index` of a run seeded with `base_seed`.
pub fn replicate_seed(base_seed: u64, index: u64) -> (u64, u64) {
    (base_seed, index)
}

#[derive(Debug, Clone)]
pub struct StableSampler {
    params: StableParams,
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl StableSampler {
    pub fn new(params: StableParams, seed: u64, stream_id: u64) -> Result<Self> {
        if !params.is_symmetric() {
            return Err(Error::InvalidParameter(
                "the sampler only generates symmetric, centred laws (beta = 0, mu = 0)".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Ok(Self { params, seed, stream_id, rng })
    }

    pub fn for_replication(params: StableParams, base_seed: u64, index: u64) -> Result<Self> {
        let (seed, stream_id) = replicate_seed(base_seed, index);
        Self::new(params, seed, stream_id)
    }

    pub fn params(&self) -> &StableParams {
        &self.params
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform on the open interval (0, 1).
    fn open_unit(&mut self) -> f64 {
        loop {
            let u: f64 = self.rng.random();
            if u > 0.0 {
                return u;
            }
        }
    }

    /// One draw with unit scale.
    fn standard(&mut self) -> f64 {
        let alpha = self.params.alpha();
        let v = PI * (self.open_unit() - 0.5);
        let w = -self.open_unit().ln();
        if (alpha - 1.0).abs() < CAUCHY_BAND {
            return v.tan();
        }
        let front = (alpha * v).sin() / v.cos().powf(alpha.recip());
        front * (((1.0 - alpha) * v).cos() / w).powf((1.0 - alpha) / alpha)
    }

    pub fn next_value(&mut self) -> f64 {
        self.params.sigma() * self.standard()
    }

    /// `n >= 1` independent draws.
    pub fn draw(&mut self, n: usize) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::EmptyRequest);
        }
        Ok((0..n).map(|_| self.next_value()).collect())
    }

    /// `n >= 2` draws wrapped as a [`Sample`].
    pub fn draw_sample(&mut self, n: usize) -> Result<Sample> {
        Sample::new(self.draw(n)?)
    }
}
