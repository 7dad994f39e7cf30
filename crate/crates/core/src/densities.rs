//! Unnormalized log densities of the Wishart family and the log Jacobian
//! determinants that relate them.
//!
//! Every kernel is defined only up to an additive constant that does not
//! depend on the random argument, so only differences between evaluations
//! at the same `(n, scale)` are meaningful. Traces of the form
//! `tr(S^{-1} X)` are evaluated as `||U_X U_S^{-1}||^2` with a triangular
//! solve; no dense inverse is formed. Nothing here touches an
//! [`OpCounter`](crate::linalg::OpCounter) that a caller can see.

use crate::error::{Error, Result};
use crate::linalg::{
    chol_upper, frobenius_norm_sq, log_det_tri, solve_right_upper, CholeskyFactor, OpCounter,
    SquareMatrix, UpperTriangular,
};
use crate::samplers::check_dof;

fn ensure_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

fn factor(x: &SquareMatrix) -> Result<CholeskyFactor> {
    chol_upper(x, &mut OpCounter::new())
}

/// `log p(A | n, Sigma)` up to a constant:
/// `-tr(Sigma^{-1} A) / 2 + (n - m - 1) / 2 * log det A`.
pub fn logkernel_wishart(a: &SquareMatrix, n: f64, u_sigma: &CholeskyFactor) -> Result<f64> {
    let m = a.dim();
    ensure_dim(m, u_sigma.dim())?;
    check_dof(m, n)?;
    let u_a = factor(a)?;
    let w = solve_right_upper(&u_a, u_sigma)?;
    let log_det_a = 2.0 * log_det_tri(&u_a)?;
    Ok(-0.5 * frobenius_norm_sq(w.as_slice()) + 0.5 * (n - m as f64 - 1.0) * log_det_a)
}

/// `log p(B | n, Omega)` up to a constant:
/// `-tr(Omega B^{-1}) / 2 - (n + m + 1) / 2 * log det B`.
pub fn logkernel_invwishart(b: &SquareMatrix, n: f64, u_omega: &CholeskyFactor) -> Result<f64> {
    let m = b.dim();
    ensure_dim(m, u_omega.dim())?;
    check_dof(m, n)?;
    let u_b = factor(b)?;
    let w = solve_right_upper(u_omega, &u_b)?;
    let log_det_b = 2.0 * log_det_tri(&u_b)?;
    Ok(-0.5 * frobenius_norm_sq(w.as_slice()) - 0.5 * (n + m as f64 + 1.0) * log_det_b)
}

/// Density of the upper Cholesky factor `U_A` of a Wishart matrix:
/// `-||U_A U_Sigma^{-1}||^2 / 2 + sum_j (n - j) log (u_A)_jj`, `j` 1-based.
pub fn logkernel_cholwishart(
    u_a: &CholeskyFactor,
    n: f64,
    u_sigma: &CholeskyFactor,
) -> Result<f64> {
    let m = u_a.dim();
    ensure_dim(m, u_sigma.dim())?;
    check_dof(m, n)?;
    let w = solve_right_upper(u_a, u_sigma)?;
    let diag: f64 = u_a
        .diagonal()
        .enumerate()
        .map(|(j, d)| (n - (j + 1) as f64) * d.ln())
        .sum();
    Ok(-0.5 * frobenius_norm_sq(w.as_slice()) + diag)
}

/// Density of the upper Cholesky factor `U_B` of an inverse-Wishart matrix:
/// `-||U_Omega U_B^{-1}||^2 / 2 - sum_j (n + j) log (u_B)_jj`, `j` 1-based.
pub fn logkernel_cholinvwishart(
    u_b: &CholeskyFactor,
    n: f64,
    u_omega: &CholeskyFactor,
) -> Result<f64> {
    let m = u_b.dim();
    ensure_dim(m, u_omega.dim())?;
    check_dof(m, n)?;
    let w = solve_right_upper(u_omega, u_b)?;
    let diag: f64 = u_b
        .diagonal()
        .enumerate()
        .map(|(j, d)| (n + (j + 1) as f64) * d.ln())
        .sum();
    Ok(-0.5 * frobenius_norm_sq(w.as_slice()) - diag)
}

/// `log |J|` of `T -> T^T T` on the distinct coordinates:
/// `m log 2 + sum_j (m + 1 - j) log t_jj`.
pub fn logjac_chol(t: &CholeskyFactor) -> f64 {
    let m = t.dim();
    let tail: f64 = t
        .diagonal()
        .enumerate()
        .map(|(j, d)| (m - j) as f64 * d.ln())
        .sum();
    m as f64 * std::f64::consts::LN_2 + tail
}

/// `log |J|` of `R -> R^{-1}` on upper triangular matrices:
/// `-(m + 1) sum_j log |r_jj|`.
pub fn logjac_tri_inverse(r: &UpperTriangular) -> Result<f64> {
    Ok(-((r.dim() + 1) as f64) * log_det_tri(r)?)
}
