//! Reference CDFs for the scalar laws the samplers reduce to.
//!
//! All are thin wrappers over the regularized incomplete gamma functions in
//! `statrs` (series / continued fraction, relative precision ~1e-15).

use statrs::function::gamma::{checked_gamma_lr, checked_gamma_ur};

use crate::error::{Error, Result};
use crate::random::DegreesOfFreedom;

fn lower_regularized(a: f64, x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::InvalidParameter("NaN argument to gamma CDF".into()));
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    if x == f64::INFINITY {
        return Ok(1.0);
    }
    checked_gamma_lr(a, x).map_err(|e| Error::InvalidParameter(e.to_string()))
}

fn upper_regularized(a: f64, x: f64) -> Result<f64> {
    if x <= 0.0 {
        return Ok(1.0);
    }
    if x == f64::INFINITY {
        return Ok(0.0);
    }
    checked_gamma_ur(a, x).map_err(|e| Error::InvalidParameter(e.to_string()))
}

/// `P(k / 2, x / 2)`.
pub fn chi_square_cdf(x: f64, k: DegreesOfFreedom) -> Result<f64> {
    if x < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "chi-square CDF needs x >= 0, got {x}"
        )));
    }
    lower_regularized(0.5 * k.get(), 0.5 * x)
}

/// CDF of gamma(shape, scale).
pub fn gamma_cdf(x: f64, shape: f64, scale: f64) -> Result<f64> {
    if !(shape > 0.0) || !(scale > 0.0) {
        return Err(Error::InvalidParameter(format!("gamma({shape}, {scale})")));
    }
    lower_regularized(shape, x / scale)
}

/// CDF of the inverse-gamma law with the given shape and scale, i.e. of
/// `1 / X` for `X ~ gamma(shape, 1 / scale)`.
pub fn inverse_gamma_cdf(x: f64, shape: f64, scale: f64) -> Result<f64> {
    if !(shape > 0.0) || !(scale > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "inverse-gamma({shape}, {scale})"
        )));
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    upper_regularized(shape, scale / x)
}
