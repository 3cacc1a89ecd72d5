//! Empirical characteristic function and the double-log response.

use crate::error::{Error, Result};
use crate::model::StableParams;

/// Lower clamp for `|phi|^2` so `-log` stays finite when the modulus underflows.
pub const EPS_LO: f64 = 1e-300;
/// `1 - EPS_HI` is the upper clamp, so `-log` stays strictly positive.
pub const EPS_HI: f64 = 1e-12;

/// Observations `x_1, ..., x_n` with `n >= 2`, all finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    values: Vec<f64>,
}

impl Sample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::TooFewObservations(values.len()));
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFiniteObservation { index, value });
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// True when every observation is identical, in which case `|phi_n(t)|^2 = 1`
    /// for every `t`.
    pub fn is_degenerate(&self) -> bool {
        let first = self.values[0];
        self.values.iter().all(|&v| v == first)
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.values.iter().map(|v| v * factor).collect())
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Equally spaced grid `t_j = x0 + j d / K`, `j = 0..=K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TGrid {
    x0: f64,
    d: f64,
    k: usize,
}

impl TGrid {
    pub fn new(x0: f64, d: f64, k: usize) -> Result<Self> {
        if !(x0 > 0.0 && x0.is_finite()) {
            return Err(Error::InvalidParameter(format!("grid start x0 must be positive, got {x0}")));
        }
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::InvalidParameter(format!("grid width d must be positive, got {d}")));
        }
        if k < 1 {
            return Err(Error::InvalidParameter("grid needs K >= 1".into()));
        }
        Ok(Self { x0, d, k })
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of points, `K + 1`.
    pub fn len(&self) -> usize {
        self.k + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self, j: usize) -> f64 {
        debug_assert!(j <= self.k);
        self.x0 + self.d * (j as f64 / self.k as f64)
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = f64> + Clone + '_ {
        (0..self.k + 1).map(move |j| self.point(j))
    }
}

/// `|(1/n) sum exp(i t x_j)|^2`, summed in sample order.
pub fn ecf_modulus_sq(sample: &Sample, t: f64) -> f64 {
    let (mut c, mut s) = (0.0, 0.0);
    for &x in sample.values() {
        let (sin, cos) = (t * x).sin_cos();
        c += cos;
        s += sin;
    }
    let n = sample.len() as f64;
    let (c, s) = (c / n, s / n);
    // Rounding can push the sum a hair past 1 when all phases align.
    (c * c + s * s).min(1.0)
}

/// A transformed response value and whether its input had to be clamped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZValue {
    pub value: f64,
    pub clamped: bool,
}

/// `log(-log v)` with `v` clamped to `[EPS_LO, 1 - EPS_HI]`.
pub fn z_transform(v: f64) -> ZValue {
    let hi = 1.0 - EPS_HI;
    let (inner, clamped) = if v < EPS_LO {
        (EPS_LO, true)
    } else if v > hi {
        (hi, true)
    } else {
        (v, false)
    };
    ZValue { value: (-inner.ln()).ln(), clamped }
}

/// Anything that can supply the double-log response at a point `t > 0`.
///
/// Samples answer with the empirical characteristic function; [`ExactCf`]
/// answers with the true one, which makes the estimators testable without
/// Monte Carlo noise.
pub trait Response {
    fn z_at(&self, t: f64) -> ZValue;
}

impl Response for Sample {
    fn z_at(&self, t: f64) -> ZValue {
        z_transform(ecf_modulus_sq(self, t))
    }
}

/// The exact characteristic function of a stable law used as a response.
#[derive(Debug, Clone, Copy)]
pub struct ExactCf(pub StableParams);

impl Response for ExactCf {
    fn z_at(&self, t: f64) -> ZValue {
        let p = &self.0;
        z_transform((-2.0 * p.sigma().powf(p.alpha()) * t.powf(p.alpha())).exp())
    }
}

/// Responses `(t_j, z_j)` on a set of points, plus the number of clamped inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct ZGrid {
    pub points: Vec<(f64, f64)>,
    pub clamp_count: usize,
}

impl ZGrid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn z_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.1)
    }
}

/// Evaluates a response at arbitrary points, in order.
pub fn z_on_points<R: Response + ?Sized>(response: &R, ts: impl IntoIterator<Item = f64>) -> ZGrid {
    let mut clamp_count = 0;
    let points = ts
        .into_iter()
        .map(|t| {
            let z = response.z_at(t);
            clamp_count += usize::from(z.clamped);
            (t, z.value)
        })
        .collect();
    ZGrid { points, clamp_count }
}

/// `z_j = z_transform(ecf_modulus_sq(sample, t_j))` for every grid point.
pub fn z_on_grid(sample: &Sample, grid: &TGrid) -> ZGrid {
    z_on_points(sample, grid.points())
}
