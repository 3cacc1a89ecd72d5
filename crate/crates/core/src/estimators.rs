//! Index and scale estimators built on the double-log ECF regression.
//!
//! Three procedures share the linearised model
//! `z(t) = log(2 sigma^alpha) + alpha log t`:
//!
//! * [`InfiniteLs`]: least squares with the design points filling an
//!   interval. The normal-equation matrix uses the exact uniform-density log
//!   moments and only the response moments are averaged over a `K + 1` point
//!   grid.
//! * Kogon-Williams: ordinary least squares on `t = 0.1, 0.2, ..., 1.0`.
//! * Koutrouvelis: ordinary least squares on `t_k = pi k / 25`, `k = 1..=K`.
//!
//! All of them assume a symmetric, centred law and do not standardise the
//! sample unless a prescale factor is set.

use std::fmt;
use std::str::FromStr;

use crate::design::{build_log_design, build_poly_design, IntervalDesign};
use crate::ecf::{z_on_points, Response, Sample, TGrid, ZGrid};
use crate::error::{Error, Result};
use crate::linalg::SquareMatrix;
use crate::model::{recover_sigma, RegressionLine};

/// Fitted slopes are clamped into `[ALPHA_MIN, ALPHA_MAX]` before sigma is
/// recovered.
pub const ALPHA_MIN: f64 = 0.05;
pub const ALPHA_MAX: f64 = 2.0;

pub const DEFAULT_K: usize = 500;
pub const DEFAULT_KOUTROUVELIS_POINTS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Koutrouvelis,
    KogonWilliams,
    InfiniteLs,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Koutrouvelis, Method::KogonWilliams, Method::InfiniteLs];

    pub fn name(&self) -> &'static str {
        match self {
            Method::InfiniteLs => "infinite-ls",
            Method::KogonWilliams => "kogon-williams",
            Method::Koutrouvelis => "koutrouvelis",
        }
    }

    pub fn title(&self) -> &'static str {
        match self {
            Method::InfiniteLs => "LS Infinite Approximation",
            Method::KogonWilliams => "Kogon-Williams",
            Method::Koutrouvelis => "Koutrouvelis",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "infinite-ls" => Ok(Method::InfiniteLs),
            "kogon-williams" => Ok(Method::KogonWilliams),
            "koutrouvelis" => Ok(Method::Koutrouvelis),
            other => Err(Error::InvalidParameter(format!(
                "unknown method `{other}` (expected infinite-ls, kogon-williams or koutrouvelis)"
            ))),
        }
    }
}

/// Where the response was evaluated.
#[derive(Debug, Clone, PartialEq)]
pub enum GridMeta {
    Interval { x0: f64, d: f64, k: usize },
    Points(Vec<f64>),
}

/// A fitted `(alpha, sigma)` pair with its regression diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub method: Method,
    /// Slope clamped into `[ALPHA_MIN, ALPHA_MAX]`.
    pub alpha_hat: f64,
    pub sigma_hat: f64,
    /// `m = log(2 sigma^alpha)` as fitted (on the prescaled data, if any).
    pub intercept: f64,
    /// Slope before clamping.
    pub slope: f64,
    /// Residual variance of the regression.
    pub s_squared: f64,
    /// Covariance of `(intercept, slope)`.
    pub coef_cov: SquareMatrix,
    /// Number of `|phi|^2` values clamped away from 0 or 1.
    pub clamp_count: usize,
    /// The raw slope fell outside `[ALPHA_MIN, ALPHA_MAX]`.
    pub slope_clamped: bool,
    pub grid: GridMeta,
}

impl Estimate {
    /// Standard error of the slope, `sqrt(cov[1][1])`.
    pub fn alpha_std_error(&self) -> f64 {
        self.coef_cov[(1, 1)].sqrt()
    }
}

/// Response moments `mu0 = mean z_j` and `mu1 = mean log(t_j) z_j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YMoments {
    pub mu0: f64,
    pub mu1: f64,
}

impl YMoments {
    pub fn from_zgrid(zgrid: &ZGrid) -> Self {
        let n = zgrid.len() as f64;
        let (mut s0, mut s1) = (0.0, 0.0);
        for &(t, z) in &zgrid.points {
            s0 += z;
            s1 += t.ln() * z;
        }
        Self { mu0: s0 / n, mu1: s1 / n }
    }
}

pub fn y_moments(sample: &Sample, grid: &TGrid) -> YMoments {
    YMoments::from_zgrid(&z_on_points(sample, grid.points()))
}

/// Common interface over the three procedures.
pub trait Estimator: Send + Sync {
    fn method(&self) -> Method;

    /// Fit against an arbitrary response source.
    fn fit_response(&self, response: &dyn Response) -> Result<Estimate>;

    /// Multiplier applied to the data before fitting; sigma is mapped back.
    fn prescale(&self) -> f64 {
        1.0
    }

    fn fit(&self, sample: &Sample) -> Result<Estimate> {
        if sample.is_degenerate() {
            return Err(Error::DegenerateSample);
        }
        let c = self.prescale();
        if c == 1.0 {
            return self.fit_response(sample);
        }
        let mut est = self.fit_response(&sample.scaled(c)?)?;
        est.sigma_hat /= c;
        Ok(est)
    }
}

fn check_prescale(c: f64) -> Result<f64> {
    if c > 0.0 && c.is_finite() {
        Ok(c)
    } else {
        Err(Error::InvalidParameter(format!("prescale factor must be positive, got {c}")))
    }
}

/// Clamp the slope and recover sigma.
fn finish_line(intercept: f64, slope: f64) -> Result<(f64, f64, bool)> {
    if !(intercept.is_finite() && slope.is_finite()) {
        return Err(Error::EstimationFailure(format!("non-finite regression coefficients ({intercept}, {slope})")));
    }
    let alpha_hat = slope.clamp(ALPHA_MIN, ALPHA_MAX);
    let sigma_hat = recover_sigma(&RegressionLine::new(intercept, alpha_hat)?)?;
    Ok((alpha_hat, sigma_hat, alpha_hat != slope))
}

/// How the normal-equation matrix of the infinite-points fit is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DesignMode {
    /// Exact integrals over the interval. The response side is still a
    /// `K + 1` point average, so there is an `O(1/K)` mismatch.
    #[default]
    Integral,
    /// Averages over the same grid as the response; this is plain OLS on the
    /// grid points.
    Discrete,
}

/// Least squares with the design points filling `[x0, x0 + d]`.
#[derive(Debug, Clone)]
pub struct InfiniteLs {
    design: IntervalDesign,
    grid: TGrid,
    mode: DesignMode,
    prescale: f64,
    matrix: SquareMatrix,
}

impl InfiniteLs {
    pub fn new(design: IntervalDesign, k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidParameter(format!("infinite-ls needs K >= 2, got {k}")));
        }
        let grid = TGrid::new(design.x0(), design.d(), k)?;
        let matrix = build_log_design(&design)?.matrix;
        Ok(Self { design, grid, mode: DesignMode::Integral, prescale: 1.0, matrix })
    }

    pub fn with_design_mode(mut self, mode: DesignMode) -> Self {
        self.mode = mode;
        self.matrix = match mode {
            DesignMode::Integral => build_log_design(&self.design).expect("validated in new").matrix,
            DesignMode::Discrete => {
                let n = self.grid.len() as f64;
                let (mut l1, mut l2) = (0.0, 0.0);
                for t in self.grid.points() {
                    let l = t.ln();
                    l1 += l;
                    l2 += l * l;
                }
                let (l1, l2) = (l1 / n, l2 / n);
                SquareMatrix::from_rows([[1.0, l1], [l1, l2]])
            }
        };
        self
    }

    pub fn with_prescale(mut self, factor: f64) -> Result<Self> {
        self.prescale = check_prescale(factor)?;
        Ok(self)
    }

    pub fn design(&self) -> &IntervalDesign {
        &self.design
    }

    pub fn grid(&self) -> &TGrid {
        &self.grid
    }

    /// The 2x2 normal-equation matrix in use.
    pub fn design_matrix(&self) -> &SquareMatrix {
        &self.matrix
    }
}

impl Estimator for InfiniteLs {
    fn method(&self) -> Method {
        Method::InfiniteLs
    }

    fn prescale(&self) -> f64 {
        self.prescale
    }

    fn fit_response(&self, response: &dyn Response) -> Result<Estimate> {
        let zgrid = z_on_points(response, self.grid.points());
        let ym = YMoments::from_zgrid(&zgrid);
        let beta = self.matrix.solve(&[ym.mu0, ym.mu1])?;
        let (b0, b1) = (beta[0], beta[1]);
        let (alpha_hat, sigma_hat, slope_clamped) = finish_line(b0, b1)?;

        let ssr: f64 = zgrid.points.iter().map(|&(t, z)| (z - b0 - b1 * t.ln()).powi(2)).sum();
        let s_squared = ssr / self.grid.k() as f64;
        let coef_cov = self.matrix.inverse()?.scale(s_squared);

        Ok(Estimate {
            method: Method::InfiniteLs,
            alpha_hat,
            sigma_hat,
            intercept: b0,
            slope: b1,
            s_squared,
            coef_cov,
            clamp_count: zgrid.clamp_count,
            slope_clamped,
            grid: GridMeta::Interval { x0: self.grid.x0(), d: self.grid.d(), k: self.grid.k() },
        })
    }
}

pub fn fit_infinite_ls(sample: &Sample, design: &IntervalDesign, k: usize) -> Result<Estimate> {
    InfiniteLs::new(*design, k)?.fit(sample)
}

/// Ordinary least squares of `z` on `log t` over a fixed list of points.
#[derive(Debug, Clone)]
pub struct GridOls {
    method: Method,
    points: Vec<f64>,
    prescale: f64,
}

impl GridOls {
    /// `t = 0.1, 0.2, ..., 1.0`.
    pub fn kogon_williams() -> Self {
        Self { method: Method::KogonWilliams, points: (1..=10).map(|k| k as f64 / 10.0).collect(), prescale: 1.0 }
    }

    /// `t_k = pi k / 25` for `k = 1..=num_points`.
    pub fn koutrouvelis(num_points: usize) -> Result<Self> {
        if num_points < 2 {
            return Err(Error::InvalidParameter(format!(
                "koutrouvelis needs at least 2 points to fit a line, got {num_points}"
            )));
        }
        Ok(Self {
            method: Method::Koutrouvelis,
            points: (1..=num_points).map(|k| std::f64::consts::PI * k as f64 / 25.0).collect(),
            prescale: 1.0,
        })
    }

    pub fn with_prescale(mut self, factor: f64) -> Result<Self> {
        self.prescale = check_prescale(factor)?;
        Ok(self)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }
}

impl Estimator for GridOls {
    fn method(&self) -> Method {
        self.method
    }

    fn prescale(&self) -> f64 {
        self.prescale
    }

    fn fit_response(&self, response: &dyn Response) -> Result<Estimate> {
        let zgrid = z_on_points(response, self.points.iter().copied());
        let p = zgrid.len() as f64;
        let logs: Vec<f64> = self.points.iter().map(|t| t.ln()).collect();
        let l_bar = logs.iter().sum::<f64>() / p;
        let z_bar = zgrid.z_values().sum::<f64>() / p;
        let (mut sxx, mut sxy) = (0.0, 0.0);
        for (l, z) in logs.iter().zip(zgrid.z_values()) {
            sxx += (l - l_bar) * (l - l_bar);
            sxy += (l - l_bar) * (z - z_bar);
        }
        let b1 = sxy / sxx;
        let b0 = z_bar - b1 * l_bar;
        let (alpha_hat, sigma_hat, slope_clamped) = finish_line(b0, b1)?;

        let ssr: f64 = logs.iter().zip(zgrid.z_values()).map(|(l, z)| (z - b0 - b1 * l).powi(2)).sum();
        let dof = (zgrid.len().saturating_sub(2)).max(1) as f64;
        let s_squared = ssr / dof;
        let var_b1 = s_squared / sxx;
        let coef_cov = SquareMatrix::from_rows([
            [s_squared / p + l_bar * l_bar * var_b1, -l_bar * var_b1],
            [-l_bar * var_b1, var_b1],
        ]);

        Ok(Estimate {
            method: self.method,
            alpha_hat,
            sigma_hat,
            intercept: b0,
            slope: b1,
            s_squared,
            coef_cov,
            clamp_count: zgrid.clamp_count,
            slope_clamped,
            grid: GridMeta::Points(self.points.clone()),
        })
    }
}

pub fn fit_kogon_williams(sample: &Sample) -> Result<Estimate> {
    GridOls::kogon_williams().fit(sample)
}

pub fn fit_koutrouvelis(sample: &Sample, num_points: usize) -> Result<Estimate> {
    GridOls::koutrouvelis(num_points)?.fit(sample)
}

/// Continuum least-squares polynomial fit of values `y_j` observed at
/// `t_j = x0 + j d / K`, `j = 0..=K`. Returns `(beta_0, ..., beta_degree)`.
pub fn fit_poly_infinite_ls(y_values: &[f64], design: &IntervalDesign, degree: usize) -> Result<Vec<f64>> {
    if y_values.len() < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 grid values, got {}", y_values.len())));
    }
    let moments = build_poly_design(design, degree)?;
    let k = y_values.len() - 1;
    let mut rhs = vec![0.0; degree + 1];
    for (j, &y) in y_values.iter().enumerate() {
        let t = design.x0() + design.d() * (j as f64 / k as f64);
        let mut tl = 1.0;
        for r in rhs.iter_mut() {
            *r += y * tl;
            tl *= t;
        }
    }
    let n = y_values.len() as f64;
    rhs.iter_mut().for_each(|r| *r /= n);
    moments.solve(&rhs)
}
