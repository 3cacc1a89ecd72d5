//! Estimation of the index and scale of symmetric stable laws by regression
//! on the empirical characteristic function.
//!
//! The squared modulus of a symmetric stable characteristic function is
//! `exp(-2 sigma^alpha t^alpha)`, so `log(-log |phi(t)|^2)` is linear in
//! `log t` with slope `alpha`. The crate provides:
//!
//! * [`model`]: exact characteristic-function quantities and the
//!   intercept/slope to `(alpha, sigma)` mapping.
//! * [`ecf`]: the empirical characteristic function and the double-log
//!   response on a grid.
//! * [`design`]: closed-form design moments for regression over a
//!   continuum of points, with a quadrature oracle.
//! * [`estimators`]: the infinite-points least-squares estimator and the
//!   Kogon-Williams and Koutrouvelis grid baselines.
//! * [`rng`]: seeded Chambers-Mallows-Stuck sampling.
//! * [`simulation`]: the Monte Carlo bias/MSE harness and its reports.
//!
//! ```
//! use stable_ecf::{fit_infinite_ls, IntervalDesign, Sample, StableParams, StableSampler};
//!
//! let params = StableParams::symmetric(1.5, 1.0).unwrap();
//! let sample = StableSampler::new(params, 7, 0).unwrap().draw_sample(2000).unwrap();
//! let est = fit_infinite_ls(&sample, &IntervalDesign::default(), 500).unwrap();
//! assert!((est.alpha_hat - 1.5).abs() < 0.2);
//! ```

// `!(x > y)` is used deliberately so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod design;
pub mod ecf;
pub mod error;
pub mod estimators;
pub mod linalg;
pub mod model;
pub mod rng;
pub mod simulation;

pub use design::{
    build_log_design, build_poly_design, log_moment, power_moment, quadrature_oracle, DesignMoments, IntervalDesign,
    ModelKind,
};
pub use ecf::{ecf_modulus_sq, z_on_grid, z_transform, ExactCf, Response, Sample, TGrid, ZGrid, ZValue};
pub use error::{Error, Result};
pub use estimators::{
    fit_infinite_ls, fit_kogon_williams, fit_koutrouvelis, fit_poly_infinite_ls, y_moments, DesignMode, Estimate,
    Estimator, GridMeta, GridOls, InfiniteLs, Method, YMoments,
};
pub use linalg::SquareMatrix;
pub use model::{cf_modulus_sq, exact_y, recover_sigma, RegressionLine, StableParams};
pub use rng::{replicate_seed, StableSampler};
pub use simulation::{
    emit_report, k_sweep, parse_csv, run_simulation, run_simulation_with, Execution, ReportFormat, ResponseKind,
    SimConfig, SimReport, SimRow, Target,
};
