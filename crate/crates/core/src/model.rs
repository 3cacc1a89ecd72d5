//! Characteristic-function quantities of symmetric stable laws.
//!
//! For a stable law with index `alpha` and scale `sigma` the squared modulus
//! of the characteristic function is `exp(-2 sigma^alpha |t|^alpha)`, so the
//! double-log transform `log(-log |phi(t)|^2)` is the straight line
//! `log(2 sigma^alpha) + alpha log t`. Skewness and location only enter the
//! argument of `phi`, never its modulus.

use crate::error::{Error, Result};

/// Parameters `(alpha, sigma, beta, mu)` of a stable law.
///
/// Every estimator in this crate assumes `beta = 0` and `mu = 0`; the other
/// values are accepted so the type can describe the full family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableParams {
    alpha: f64,
    sigma: f64,
    beta: f64,
    mu: f64,
}

impl StableParams {
    pub fn new(alpha: f64, sigma: f64, beta: f64, mu: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::InvalidParameter(format!("alpha must lie in (0, 2], got {alpha}")));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("sigma must be positive and finite, got {sigma}")));
        }
        if !(-1.0..=1.0).contains(&beta) {
            return Err(Error::InvalidParameter(format!("beta must lie in [-1, 1], got {beta}")));
        }
        if !mu.is_finite() {
            return Err(Error::InvalidParameter(format!("mu must be finite, got {mu}")));
        }
        Ok(Self { alpha, sigma, beta, mu })
    }

    /// Symmetric, centred law (`beta = mu = 0`).
    pub fn symmetric(alpha: f64, sigma: f64) -> Result<Self> {
        Self::new(alpha, sigma, 0.0, 0.0)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Location shift. Never used numerically.
    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn is_symmetric(&self) -> bool {
        self.beta == 0.0 && self.mu == 0.0
    }

    /// The line `log(2 sigma^alpha) + alpha log t` that the double-log
    /// transform of the exact characteristic function follows.
    pub fn regression_line(&self) -> RegressionLine {
        RegressionLine { intercept: (2.0 * self.sigma.powf(self.alpha)).ln(), slope: self.alpha }
    }
}

/// Intercept `m = log(2 sigma^alpha)` and slope `alpha` of the linearised model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressionLine {
    pub intercept: f64,
    pub slope: f64,
}

impl RegressionLine {
    pub fn new(intercept: f64, slope: f64) -> Result<Self> {
        if !(intercept.is_finite() && slope.is_finite()) {
            return Err(Error::EstimationFailure(format!(
                "non-finite regression line (intercept {intercept}, slope {slope})"
            )));
        }
        Ok(Self { intercept, slope })
    }

    pub fn eval_log(&self, log_t: f64) -> f64 {
        self.intercept + self.slope * log_t
    }
}

fn check_t(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("t must be positive and finite, got {t}")))
    }
}

/// `|phi(t)|^2 = exp(-2 sigma^alpha t^alpha)` for `t > 0`.
pub fn cf_modulus_sq(params: &StableParams, t: f64) -> Result<f64> {
    check_t(t)?;
    Ok((-2.0 * params.sigma.powf(params.alpha) * t.powf(params.alpha)).exp())
}

/// `log(-log |phi(t)|^2) = log(2 sigma^alpha) + alpha log t`, evaluated in
/// closed form.
pub fn exact_y(params: &StableParams, t: f64) -> Result<f64> {
    check_t(t)?;
    Ok(params.regression_line().eval_log(t.ln()))
}

/// Inverts `m = log(2 sigma^alpha)` for sigma given the slope as alpha.
pub fn recover_sigma(line: &RegressionLine) -> Result<f64> {
    if !(line.slope > 0.0) {
        return Err(Error::EstimationFailure(format!("slope {} is not positive, sigma is undefined", line.slope)));
    }
    let sigma = (line.intercept.exp() / 2.0).powf(line.slope.recip());
    if sigma > 0.0 && sigma.is_finite() {
        Ok(sigma)
    } else {
        Err(Error::EstimationFailure(format!("recovered sigma {sigma} is not a positive finite number")))
    }
}
