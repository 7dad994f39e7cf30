//! The defining construction of a Wishart matrix, kept as an independent
//! oracle for the Bartlett sampler.

use crate::error::{Error, Result};
use crate::linalg::{CholeskyFactor, SquareMatrix};
use crate::random::ScalarSource;

/// `A = sum_k y_k y_k^T` over `n` columns `y_k = U_Sigma^T g_k`, `g_k ~ N(0, I)`.
///
/// O(n m^2) per draw; only meant for small `n`. `n` must be a positive integer.
pub fn rwishart_outer_oracle<R: ScalarSource + ?Sized>(
    rng: &mut R,
    m: usize,
    n: f64,
    u_sigma: &CholeskyFactor,
) -> Result<SquareMatrix> {
    if !(n >= 1.0) || n.fract() != 0.0 || !n.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "outer-product oracle needs a positive integer n, got {n}"
        )));
    }
    if u_sigma.dim() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: u_sigma.dim(),
        });
    }
    let u = u_sigma.as_slice();
    let mut g = vec![0.0; m];
    let mut y = vec![0.0; m];
    let mut a = vec![0.0; m * m];
    for _ in 0..n as usize {
        for gi in g.iter_mut() {
            *gi = rng.std_normal();
        }
        // y = U^T g, U upper triangular
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = (0..=i).map(|k| u[k * m + i] * g[k]).sum();
        }
        for i in 0..m {
            for j in 0..m {
                a[i * m + j] += y[i] * y[j];
            }
        }
    }
    SquareMatrix::from_row_major(m, a)
}
