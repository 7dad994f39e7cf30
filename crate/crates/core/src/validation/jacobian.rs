//! Finite-difference Jacobian determinants of maps between triangular (or
//! symmetric) matrices.
//!
//! Coordinates are the distinct upper-triangle entries taken column by
//! column: `x_11, x_12, x_22, x_13, x_23, x_33, ...`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::UpperTriangular;

/// Relative central-difference step: `h = FD_STEP * max(1, |x|)`.
pub const FD_STEP: f64 = 1e-6;

/// `(row, col)` pairs of the upper triangle in column-major order.
pub fn tri_coordinates(m: usize) -> Vec<(usize, usize)> {
    (0..m).flat_map(|j| (0..=j).map(move |i| (i, j))).collect()
}

/// `log |det J|` of `map` at `at`, where `map` returns an `m x m` row-major
/// matrix whose upper triangle holds the output coordinates.
pub fn fd_logdet_jacobian<F>(map: F, at: &UpperTriangular) -> Result<f64>
where
    F: Fn(&UpperTriangular) -> Result<Vec<f64>>,
{
    let m = at.dim();
    let coords = tri_coordinates(m);
    let d = coords.len();
    let base = at.as_slice();
    let mut jac = DMatrix::<f64>::zeros(d, d);

    for (col, &(i, j)) in coords.iter().enumerate() {
        let x = base[i * m + j];
        let h = FD_STEP * x.abs().max(1.0);
        let mut plus = base.to_vec();
        let mut minus = base.to_vec();
        plus[i * m + j] = x + h;
        minus[i * m + j] = x - h;
        let fp = map(&UpperTriangular::from_raw(m, plus))?;
        let fm = map(&UpperTriangular::from_raw(m, minus))?;
        if fp.len() != m * m || fm.len() != m * m {
            return Err(Error::DimensionMismatch {
                expected: m * m,
                found: fp.len(),
            });
        }
        for (row, &(p, q)) in coords.iter().enumerate() {
            jac[(row, col)] = (fp[p * m + q] - fm[p * m + q]) / (2.0 * h);
        }
    }

    let det = jac.lu().determinant();
    if det == 0.0 || !det.is_finite() {
        return Err(Error::NumericalFailure(format!(
            "finite-difference Jacobian is singular (det = {det})"
        )));
    }
    Ok(det.abs().ln())
}
