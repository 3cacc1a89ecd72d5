//! Limiting design matrices for regression on a continuum of points.
//!
//! As the grid `t_j = x0 + j d / K` fills `[x0, x0 + d]`, averages
//! `(1/(K+1)) sum g(t_j)` tend to the uniform-density mean
//! `(1/d) int g(t) dt`, so the normal-equation matrix of the regression has
//! closed-form entries. The log-t model uses the moments of `log t` and the
//! polynomial model the moments of `t^l`.

use crate::error::{Error, Result};
use crate::linalg::SquareMatrix;

pub mod quadrature;

pub use quadrature::quadrature_oracle;

/// Largest polynomial degree accepted; monomial moment matrices are
/// Hilbert-like and lose roughly a digit per degree.
pub const MAX_POLY_DEGREE: usize = 8;

/// The regression interval `[x0, x0 + d]`.
///
/// Any finite `x0` is accepted; the log-t moments additionally require
/// `x0 > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalDesign {
    x0: f64,
    d: f64,
}

impl Default for IntervalDesign {
    /// `[0.1, 2.0]`.
    fn default() -> Self {
        Self { x0: 0.1, d: 1.9 }
    }
}

impl IntervalDesign {
    pub fn new(x0: f64, d: f64) -> Result<Self> {
        if !x0.is_finite() {
            return Err(Error::InvalidParameter(format!("x0 must be finite, got {x0}")));
        }
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::InvalidParameter(format!("interval width d must be positive, got {d}")));
        }
        Ok(Self { x0, d })
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn end(&self) -> f64 {
        self.x0 + self.d
    }

    fn require_log_domain(&self) -> Result<()> {
        if self.x0 > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "log-t moments need the interval to start above 0 (log t is undefined at t <= 0), got x0 = {}",
                self.x0
            )))
        }
    }
}

/// Which regression model a moment matrix belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    LogT,
    /// Polynomial in `t`; degree 1 is the linear-t model.
    Polynomial(usize),
}

/// Symmetric moment matrix `x_{i,j}` of a regression design.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMoments {
    pub matrix: SquareMatrix,
    pub kind: ModelKind,
    pub design: IntervalDesign,
}

impl DesignMoments {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Determinant of the moment matrix.
    ///
    /// Polynomial designs are evaluated through the central moments about
    /// the interval midpoint: the shift is a unit-triangular change of basis,
    /// so the determinant is unchanged, and the raw entries would otherwise
    /// cancel badly when `x0` is large compared with `d`. Degree 1 gives
    /// `d^2 / 12`.
    pub fn determinant(&self) -> f64 {
        match self.kind {
            ModelKind::LogT => self.matrix.determinant(),
            ModelKind::Polynomial(degree) => central_hankel(self.design.d, degree).determinant(),
        }
    }

    pub fn condition_estimate(&self) -> f64 {
        self.matrix.condition_1()
    }

    pub fn is_positive_definite(&self) -> bool {
        self.matrix.cholesky().is_some()
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        self.matrix.solve(rhs)
    }
}

/// `(1/d) int_{x0}^{x0+d} log^m(t) dt` for `m` in {1, 2}.
///
/// Both orders follow from `int log^m t dt = t log^m t - m int log^{m-1} t dt`;
/// higher orders would extend the same recursion.
pub fn log_moment(design: &IntervalDesign, m: u32) -> Result<f64> {
    design.require_log_domain()?;
    let (a, b, d) = (design.x0, design.end(), design.d);
    let (la, lb) = (a.ln(), b.ln());
    let first = (b * lb - a * la - d) / d;
    match m {
        1 => Ok(first),
        2 => Ok((b * lb * lb - a * la * la - 2.0 * d * first) / d),
        _ => Err(Error::UnsupportedOrder(m)),
    }
}

/// `(1/d) int_{x0}^{x0+d} t^m dt = [(x0+d)^{m+1} - x0^{m+1}] / (d (m+1))`.
pub fn power_moment(design: &IntervalDesign, m: u32) -> f64 {
    let (a, b) = (design.x0, design.end());
    // (b^{m+1} - a^{m+1}) / (b - a) expanded as sum a^k b^{m-k}, which avoids
    // the cancellation of the difference form when d is small.
    let mut sum = 0.0;
    let mut a_pow = 1.0;
    for k in 0..=m {
        sum += a_pow * b.powi((m - k) as i32);
        a_pow *= a;
    }
    sum / f64::from(m + 1)
}

/// `[[1, x12], [x12, x22]]` with the log moments of the interval.
pub fn build_log_design(design: &IntervalDesign) -> Result<DesignMoments> {
    let x12 = log_moment(design, 1)?;
    let x22 = log_moment(design, 2)?;
    Ok(DesignMoments {
        matrix: SquareMatrix::from_rows([[1.0, x12], [x12, x22]]),
        kind: ModelKind::LogT,
        design: *design,
    })
}

/// Hankel matrix of power moments, entry `(i, j)` = `power_moment(i + j)`.
///
/// Fails for degrees above [`MAX_POLY_DEGREE`], and for designs whose raw
/// moment matrix is not numerically positive definite (from degree 4 on this
/// happens once `x0` is large relative to `d`).
pub fn build_poly_design(design: &IntervalDesign, degree: usize) -> Result<DesignMoments> {
    if degree < 1 {
        return Err(Error::InvalidParameter("polynomial degree must be at least 1".into()));
    }
    if degree > MAX_POLY_DEGREE {
        return Err(Error::IllConditioned(degree));
    }
    let moments: Vec<f64> = (0..=2 * degree as u32).map(|l| power_moment(design, l)).collect();
    let matrix = SquareMatrix::from_fn(degree + 1, |i, j| moments[i + j]);
    if matrix.cholesky().is_none() {
        return Err(Error::NumericallySingular(degree));
    }
    Ok(DesignMoments { matrix, kind: ModelKind::Polynomial(degree), design: *design })
}

/// Moments of the uniform law on `[-d/2, d/2]` in Hankel layout.
fn central_hankel(d: f64, degree: usize) -> SquareMatrix {
    let half = d / 2.0;
    SquareMatrix::from_fn(degree + 1, |i, j| {
        let l = i + j;
        if l % 2 == 1 {
            0.0
        } else {
            half.powi(l as i32) / (l + 1) as f64
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ecf::TGrid;
    use proptest::prelude::*;
    use std::f64::consts::E;

    // mpmath quad, 30 digits, over [0.1, 2.0].
    const X12_REF: f64 = -0.149_182_699_779_318;
    const X22_REF: f64 = 0.525_058_145_236_828;

    fn dsg(x0: f64, d: f64) -> IntervalDesign {
        IntervalDesign::new(x0, d).unwrap()
    }

    #[test]
    fn log_moment_examples() {
        let g = dsg(0.1, 1.9);
        assert!((log_moment(&g, 1).unwrap() - X12_REF).abs() < 1e-14);
        let closed = (2.0 * 2.0f64.ln() - 0.1 * 0.1f64.ln() - 1.9) / 1.9;
        assert!((log_moment(&g, 1).unwrap() - closed).abs() < 1e-15);
        assert!((log_moment(&g, 2).unwrap() - X22_REF).abs() < 1e-14);

        let v = log_moment(&dsg(1.0, E - 1.0), 1).unwrap();
        assert!((v - 1.0 / (E - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn log_moment_errors() {
        assert_eq!(log_moment(&dsg(0.1, 1.9), 3), Err(Error::UnsupportedOrder(3)));
        assert!(matches!(log_moment(&dsg(0.0, 1.0), 1), Err(Error::InvalidParameter(_))));
        assert!(build_log_design(&dsg(-1.0, 3.0)).is_err());
    }

    #[test]
    fn power_moment_examples() {
        assert_eq!(power_moment(&dsg(0.0, 1.0), 1), 0.5);
        assert_eq!(power_moment(&dsg(0.3, 7.0), 0), 1.0);
        assert!((power_moment(&dsg(0.1, 1.9), 2) - (0.01 + 0.19 + 3.61 / 3.0)).abs() < 1e-15);
        // int_{0.5}^{2.5} t^3 dt / 2 = (2.5^4 - 0.5^4) / 8
        assert!((power_moment(&dsg(0.5, 2.0), 3) - 4.875).abs() < 1e-14);
        let g = dsg(0.7, 0.4);
        assert!((power_moment(&g, 1) - (0.7 + 0.2)).abs() < 1e-15);
    }

    #[test]
    fn log_design_shape() {
        let m = build_log_design(&dsg(0.1, 1.9)).unwrap();
        assert_eq!(m.kind, ModelKind::LogT);
        assert_eq!(m.matrix[(0, 0)], 1.0);
        assert_eq!(m.matrix[(0, 1)], m.matrix[(1, 0)]);
        assert!((m.matrix[(0, 1)] - X12_REF).abs() < 1e-14);
        assert!((m.matrix[(1, 1)] - X22_REF).abs() < 1e-14);
        assert!((m.determinant() - (X22_REF - X12_REF * X12_REF)).abs() < 1e-14);
        assert!(m.determinant() > 0.0);
    }

    #[test]
    fn poly_design_examples() {
        let m = build_poly_design(&dsg(0.0, 1.0), 2).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((m.matrix[(i, j)] - 1.0 / (i + j + 1) as f64).abs() < 1e-15);
            }
        }
        let lin = build_poly_design(&dsg(0.1, 1.9), 1).unwrap();
        assert!((lin.matrix[(0, 1)] - (0.1 + 1.9 / 2.0)).abs() < 1e-15);
        assert!((lin.matrix[(1, 1)] - (0.01 + 0.19 + 3.61 / 3.0)).abs() < 1e-15);
        assert!((lin.determinant() - 1.9 * 1.9 / 12.0).abs() < 1e-15);

        let g = dsg(0.1, 1.9);
        let cubic = build_poly_design(&g, 3).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let l = (i + j) as i32;
                let q = quadrature_oracle(|t| t.powi(l), &g).unwrap();
                assert!((cubic.matrix[(i, j)] - q).abs() <= 1e-10 * q.abs());
            }
        }
    }

    #[test]
    fn poly_degree_guard() {
        assert_eq!(build_poly_design(&dsg(0.1, 1.9), 9), Err(Error::IllConditioned(9)));
        assert!(build_poly_design(&dsg(0.1, 1.9), 0).is_err());
        assert!(build_poly_design(&dsg(0.1, 1.9), 8).is_ok());
        assert_eq!(build_poly_design(&dsg(5.0, 0.1), 6), Err(Error::NumericallySingular(6)));
    }

    /// `int_a^b log^m t dt` evaluated through the reduction formula, written
    /// out independently of `log_moment`.
    fn log_power_integral(a: f64, b: f64, m: u32) -> f64 {
        fn antiderivative(t: f64, m: u32) -> f64 {
            if m == 0 {
                t
            } else {
                t * t.ln().powi(m as i32) - f64::from(m) * antiderivative(t, m - 1)
            }
        }
        antiderivative(b, m) - antiderivative(a, m)
    }

    #[test]
    fn reduction_formula_matches_quadrature() {
        for &(x0, d) in &[(0.1, 1.9), (0.01, 3.0), (2.0, 0.5), (0.3, 9.0)] {
            let g = dsg(x0, d);
            for m in 1..=4u32 {
                let rec = log_power_integral(x0, x0 + d, m) / d;
                let q = quadrature_oracle(|t| t.ln().powi(m as i32), &g).unwrap();
                assert!((rec - q).abs() <= 1e-10 * q.abs().max(1e-3), "m={m} {rec} {q}");
            }
            // The closed form, including the sign of the -2 d x12 term.
            let q2 = quadrature_oracle(|t| t.ln().powi(2), &g).unwrap();
            assert!((log_moment(&g, 2).unwrap() - q2).abs() <= 1e-10 * q2);
        }
    }

    #[test]
    fn riemann_average_converges_at_first_order() {
        let design = dsg(0.1, 1.9);
        for m in [1u32, 2] {
            let exact = log_moment(&design, m).unwrap();
            let err = |k: usize| {
                let g = TGrid::new(0.1, 1.9, k).unwrap();
                let avg: f64 = g.points().map(|t| t.ln().powi(m as i32)).sum::<f64>() / (k + 1) as f64;
                (avg - exact).abs()
            };
            for k in [100, 200, 400, 800] {
                let ratio = err(k) / err(2 * k);
                assert!((ratio - 2.0).abs() < 0.1, "m={m} K={k} ratio={ratio}");
            }
        }
    }

    proptest! {
        #[test]
        fn moment_matrices_are_spd(x0 in 0.01f64..5.0, d in 0.1f64..10.0, degree in 1usize..=8) {
            let g = dsg(x0, d);
            let log = build_log_design(&g).unwrap();
            prop_assert!(log.matrix.is_symmetric(0.0));
            prop_assert!(log.is_positive_definite());
            match build_poly_design(&g, degree) {
                Ok(poly) => {
                    prop_assert!(poly.matrix.is_symmetric(0.0));
                    prop_assert_eq!(poly.matrix[(0, 0)], 1.0);
                    prop_assert!(poly.is_positive_definite());
                }
                Err(e) => prop_assert_eq!(e, Error::NumericallySingular(degree)),
            }
            // Low degrees, and intervals reaching back towards the origin, always build.
            if degree <= 3 || d >= 2.0 * x0 {
                prop_assert!(build_poly_design(&g, degree).is_ok());
            }
        }

        #[test]
        fn linear_design_determinant(x0 in 0.0f64..5.0, d in 0.1f64..10.0) {
            let det = build_poly_design(&dsg(x0, d), 1).unwrap().determinant();
            let expected = d * d / 12.0;
            prop_assert!(((det - expected) / expected).abs() < 1e-14);
        }
    }
}
