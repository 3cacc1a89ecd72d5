use thiserror::Error;

/// Errors produced by the estimation library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("need at least 2 observations, got {0}")]
    TooFewObservations(usize),

    #[error("observation {index} is not finite ({value})")]
    NonFiniteObservation { index: usize, value: f64 },

    #[error(
        "degenerate sample: all observations are identical, so the empirical \
         characteristic function modulus is 1 everywhere and carries no information"
    )]
    DegenerateSample,

    #[error("estimation failed: {0}")]
    EstimationFailure(String),

    #[error("unsupported log-moment order {0} (only orders 1 and 2 are available)")]
    UnsupportedOrder(u32),

    #[error("polynomial degree {0} is above the conditioning limit of {max}", max = crate::design::MAX_POLY_DEGREE)]
    IllConditioned(usize),

    #[error("degree-{0} moment matrix is numerically singular on this interval (x0 too large relative to d)")]
    NumericallySingular(usize),

    #[error("singular linear system")]
    SingularMatrix,

    #[error("quadrature did not converge on [{a}, {b}]")]
    OracleFailure { a: f64, b: f64 },

    #[error("empty request: at least one draw is required")]
    EmptyRequest,

    #[error("unknown config key `{key}`; valid keys: {valid}")]
    UnknownConfigKey { key: String, valid: String },

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
