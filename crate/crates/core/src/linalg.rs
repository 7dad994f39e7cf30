//! Dense square and upper-triangular matrices and the three cubic-cost
//! kernels the samplers are built from.
//!
//! Every kernel that a sampler calls takes an [`OpCounter`] and bumps exactly
//! one field by one:
//!
//! | kernel          | counted as |
//! |-----------------|------------|
//! | [`chol_upper`]  | POTRF      |
//! | [`tri_inverse`] | TRTRI      |
//! | [`tri_mul`]     | TRMM       |
//! | [`gram_ut`]     | TRMM       |
//! | [`gram_vt`]     | TRMM       |
//!
//! LAPACK would form `U^T U` and `V V^T` with LAUUM/SYRK; they are booked as
//! TRMM here.
//!
//! Storage is dense row-major in both types. The strict lower triangle of an
//! [`UpperTriangular`] is stored as explicit zeros.

use std::fmt;
use std::ops::Index;

use serde::Serialize;

use crate::error::{Error, Result};

/// Relative tolerance on `max |x_ij - x_ji|` accepted by [`chol_upper`].
pub const SYMMETRY_TOLERANCE: f64 = 1e-8;

fn check_finite(dim: usize, data: &[f64]) -> Result<()> {
    match data.iter().position(|v| !v.is_finite()) {
        Some(k) => Err(Error::NonFinite {
            row: k / dim,
            col: k % dim,
        }),
        None => Ok(()),
    }
}

fn check_shape(dim: usize, len: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::InvalidParameter(
            "matrix dimension must be at least 1".into(),
        ));
    }
    if len != dim * dim {
        return Err(Error::DimensionMismatch {
            expected: dim * dim,
            found: len,
        });
    }
    Ok(())
}

/// Dense `m x m` matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct SquareMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn from_row_major(dim: usize, data: Vec<f64>) -> Result<Self> {
        check_shape(dim, data.len())?;
        check_finite(dim, &data)?;
        Ok(Self { dim, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.len(),
            });
        }
        Self::from_row_major(dim, rows.concat())
    }

    pub fn identity(dim: usize) -> Self {
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = 1.0;
        }
        Self { dim, data }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        let dim = diag.len();
        let mut data = vec![0.0; dim * dim];
        for (i, &d) in diag.iter().enumerate() {
            data[i * dim + i] = d;
        }
        Self::from_row_major(dim, data)
    }

    pub(crate) fn from_raw(dim: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), dim * dim);
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::from_raw(self.dim, self.data.iter().map(|v| v * factor).collect())
    }

    /// Largest `|x_ij - x_ji|` relative to the largest `|x_ij|`.
    pub fn asymmetry(&self) -> f64 {
        let scale = self.data.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst / scale
    }

    /// Elementwise difference, used by the moment estimators.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self::from_raw(self.dim, data))
    }
}

impl Index<(usize, usize)> for SquareMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.dim + j]
    }
}

impl fmt::Debug for SquareMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows()).finish()
    }
}

/// Dense `m x m` matrix whose strict lower triangle is exactly zero.
#[derive(Clone, PartialEq)]
pub struct UpperTriangular {
    dim: usize,
    data: Vec<f64>,
}

impl UpperTriangular {
    /// Rejects any nonzero entry below the diagonal.
    pub fn from_row_major(dim: usize, data: Vec<f64>) -> Result<Self> {
        check_shape(dim, data.len())?;
        check_finite(dim, &data)?;
        for i in 0..dim {
            for j in 0..i {
                if data[i * dim + j] != 0.0 {
                    return Err(Error::NotUpperTriangular { row: i, col: j });
                }
            }
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.len(),
            });
        }
        Self::from_row_major(dim, rows.concat())
    }

    /// Keeps the upper triangle (diagonal included) of `x` and zeroes the rest.
    pub fn upper_part_of(x: &SquareMatrix) -> Self {
        let dim = x.dim();
        let mut data = x.as_slice().to_vec();
        for i in 0..dim {
            for j in 0..i {
                data[i * dim + j] = 0.0;
            }
        }
        Self { dim, data }
    }

    pub fn identity(dim: usize) -> Self {
        let SquareMatrix { dim, data } = SquareMatrix::identity(dim);
        Self { dim, data }
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        let SquareMatrix { dim, data } = SquareMatrix::from_diagonal(diag)?;
        Ok(Self { dim, data })
    }

    pub(crate) fn from_raw(dim: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), dim * dim);
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn diagonal(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.dim).map(move |i| self.data[i * self.dim + i])
    }

    pub fn to_square(&self) -> SquareMatrix {
        SquareMatrix::from_raw(self.dim, self.data.clone())
    }

    pub fn into_square(self) -> SquareMatrix {
        SquareMatrix::from_raw(self.dim, self.data)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::from_raw(self.dim, self.data.iter().map(|v| v * factor).collect())
    }
}

impl Index<(usize, usize)> for UpperTriangular {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.dim + j]
    }
}

impl fmt::Debug for UpperTriangular {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows()).finish()
    }
}

/// Upper Cholesky factor: upper triangular with a strictly positive diagonal.
#[derive(Clone, PartialEq)]
pub struct CholeskyFactor(UpperTriangular);

impl CholeskyFactor {
    /// Structural check only: the diagonal must be strictly positive.
    pub fn new(u: UpperTriangular) -> Result<Self> {
        for (j, d) in u.diagonal().enumerate() {
            if d <= 0.0 {
                return Err(Error::NotPositiveDefinite { pivot: j, value: d });
            }
        }
        Ok(Self(u))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(UpperTriangular::from_rows(rows)?)
    }

    pub fn identity(dim: usize) -> Self {
        Self(UpperTriangular::identity(dim))
    }

    pub fn as_upper(&self) -> &UpperTriangular {
        &self.0
    }

    pub fn into_upper(self) -> UpperTriangular {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }
}

impl std::ops::Deref for CholeskyFactor {
    type Target = UpperTriangular;

    fn deref(&self) -> &UpperTriangular {
        &self.0
    }
}

impl fmt::Debug for CholeskyFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Tally of cubic-cost kernel invocations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize)]
pub struct OpCounter {
    pub trtri: u64,
    pub trmm: u64,
    pub potrf: u64,
}

impl OpCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn total(&self) -> u64 {
        self.trtri + self.trmm + self.potrf
    }
}

impl fmt::Display for OpCounter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "trtri={} trmm={} potrf={}",
            self.trtri, self.trmm, self.potrf
        )
    }
}

fn ensure_same_dim(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch {
            expected: a,
            found: b,
        });
    }
    Ok(())
}

/// Upper Cholesky factor `U` with `U^T U = X` (POTRF).
///
/// The upper triangle of `x` is authoritative; the lower triangle only has to
/// agree within [`SYMMETRY_TOLERANCE`]. Right-looking, unpivoted.
pub fn chol_upper(x: &SquareMatrix, counter: &mut OpCounter) -> Result<CholeskyFactor> {
    counter.potrf += 1;
    let m = x.dim();
    let scale = x.as_slice().iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    for i in 0..m {
        for j in (i + 1)..m {
            if (x[(i, j)] - x[(j, i)]).abs() > SYMMETRY_TOLERANCE * scale {
                return Err(Error::NotSymmetric { row: i, col: j });
            }
        }
    }

    let mut a = UpperTriangular::upper_part_of(x).data;
    for k in 0..m {
        let pivot = a[k * m + k];
        if !(pivot > 0.0) || !pivot.is_finite() {
            return Err(Error::NotPositiveDefinite {
                pivot: k,
                value: pivot,
            });
        }
        let r = pivot.sqrt();
        a[k * m + k] = r;
        let inv = 1.0 / r;
        for v in &mut a[k * m + k + 1..(k + 1) * m] {
            *v *= inv;
        }
        let (head, tail) = a.split_at_mut((k + 1) * m);
        let row_k = &head[k * m..];
        for i in (k + 1)..m {
            let aki = row_k[i];
            if aki == 0.0 {
                continue;
            }
            let row_i = &mut tail[(i - k - 1) * m..(i - k) * m];
            for j in i..m {
                row_i[j] -= aki * row_k[j];
            }
        }
    }
    Ok(CholeskyFactor(UpperTriangular::from_raw(m, a)))
}

/// Inverse of an upper triangular matrix (TRTRI).
pub fn tri_inverse(u: &UpperTriangular, counter: &mut OpCounter) -> Result<UpperTriangular> {
    counter.trtri += 1;
    let m = u.dim();
    if let Some(index) = u.diagonal().position(|d| d == 0.0) {
        return Err(Error::SingularMatrix { index });
    }
    let src = u.as_slice();
    let mut r = vec![0.0; m * m];
    let mut acc = vec![0.0; m];
    // Row i of R solves r_i U = e_i left to right; acc[j] holds sum_{k<j} r_ik u_kj.
    for i in 0..m {
        acc[i..].fill(0.0);
        let row = &mut r[i * m..(i + 1) * m];
        for k in i..m {
            let ukk = src[k * m + k];
            let rik = if k == i { 1.0 / ukk } else { -acc[k] / ukk };
            row[k] = rik;
            if rik != 0.0 {
                let u_row = &src[k * m..(k + 1) * m];
                for j in (k + 1)..m {
                    acc[j] += rik * u_row[j];
                }
            }
        }
    }
    if let Some(k) = r.iter().position(|v| !v.is_finite()) {
        return Err(Error::SingularMatrix { index: k % m });
    }
    Ok(UpperTriangular::from_raw(m, r))
}

/// Product `C X` of two upper triangular matrices (TRMM).
pub fn tri_mul(
    c: &UpperTriangular,
    x: &UpperTriangular,
    counter: &mut OpCounter,
) -> Result<UpperTriangular> {
    ensure_same_dim(c.dim(), x.dim())?;
    counter.trmm += 1;
    let m = c.dim();
    let (cs, xs) = (c.as_slice(), x.as_slice());
    let mut y = vec![0.0; m * m];
    for i in 0..m {
        let out = &mut y[i * m..(i + 1) * m];
        for k in i..m {
            let cik = cs[i * m + k];
            if cik == 0.0 {
                continue;
            }
            let x_row = &xs[k * m..(k + 1) * m];
            for j in k..m {
                out[j] += cik * x_row[j];
            }
        }
    }
    Ok(UpperTriangular::from_raw(m, y))
}

fn mirror_upper(m: usize, data: &mut [f64]) {
    for i in 0..m {
        for j in (i + 1)..m {
            data[j * m + i] = data[i * m + j];
        }
    }
}

/// `U^T U`, exactly symmetric (counted as one TRMM).
pub fn gram_ut(u: &UpperTriangular, counter: &mut OpCounter) -> SquareMatrix {
    counter.trmm += 1;
    let m = u.dim();
    let us = u.as_slice();
    let mut x = vec![0.0; m * m];
    for k in 0..m {
        let u_row = &us[k * m..(k + 1) * m];
        for i in k..m {
            let uki = u_row[i];
            if uki == 0.0 {
                continue;
            }
            let out = &mut x[i * m..(i + 1) * m];
            for j in i..m {
                out[j] += uki * u_row[j];
            }
        }
    }
    mirror_upper(m, &mut x);
    SquareMatrix::from_raw(m, x)
}

/// `V V^T`, exactly symmetric (counted as one TRMM).
pub fn gram_vt(v: &UpperTriangular, counter: &mut OpCounter) -> SquareMatrix {
    counter.trmm += 1;
    let m = v.dim();
    let vs = v.as_slice();
    let mut x = vec![0.0; m * m];
    for i in 0..m {
        for j in i..m {
            let a = &vs[i * m + j..(i + 1) * m];
            let b = &vs[j * m + j..(j + 1) * m];
            x[i * m + j] = a.iter().zip(b).map(|(p, q)| p * q).sum();
        }
    }
    mirror_upper(m, &mut x);
    SquareMatrix::from_raw(m, x)
}

/// Sum of squared entries, `tr(X^T X)`.
pub fn frobenius_norm_sq(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// `sum_j log |u_jj|`.
pub fn log_det_tri(u: &UpperTriangular) -> Result<f64> {
    let mut acc = 0.0;
    for (index, d) in u.diagonal().enumerate() {
        if d == 0.0 {
            return Err(Error::SingularMatrix { index });
        }
        acc += d.abs().ln();
    }
    Ok(acc)
}

/// `X U^{-1}` for upper triangular `X` and `U`, by forward substitution on
/// each row. Not counted; used by the density kernels.
pub fn solve_right_upper(x: &UpperTriangular, u: &UpperTriangular) -> Result<UpperTriangular> {
    ensure_same_dim(u.dim(), x.dim())?;
    let m = u.dim();
    if let Some(index) = u.diagonal().position(|d| d == 0.0) {
        return Err(Error::SingularMatrix { index });
    }
    let (xs, us) = (x.as_slice(), u.as_slice());
    let mut w = vec![0.0; m * m];
    let mut acc = vec![0.0; m];
    for i in 0..m {
        acc[i..].fill(0.0);
        let row = &mut w[i * m..(i + 1) * m];
        for k in i..m {
            let wik = (xs[i * m + k] - acc[k]) / us[k * m + k];
            row[k] = wik;
            if wik != 0.0 {
                for j in (k + 1)..m {
                    acc[j] += wik * us[k * m + j];
                }
            }
        }
    }
    Ok(UpperTriangular::from_raw(m, w))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_product(a: &[f64], b: &[f64], m: usize) -> Vec<f64> {
        let mut out = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    out[i * m + j] += a[i * m + k] * b[k * m + j];
                }
            }
        }
        out
    }

    fn transpose(a: &[f64], m: usize) -> Vec<f64> {
        let mut t = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                t[j * m + i] = a[i * m + j];
            }
        }
        t
    }

    fn ut(rows: &[&[f64]]) -> UpperTriangular {
        UpperTriangular::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn sq(rows: &[&[f64]]) -> SquareMatrix {
        SquareMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn chol_examples() {
        let mut c = OpCounter::new();
        let u = chol_upper(&SquareMatrix::identity(3), &mut c).unwrap();
        assert_eq!(u.as_upper(), &UpperTriangular::identity(3));
        assert_eq!(
            c,
            OpCounter {
                potrf: 1,
                ..Default::default()
            }
        );

        let u = chol_upper(&sq(&[&[4.0, 2.0], &[2.0, 5.0]]), &mut c).unwrap();
        assert_eq!(u.as_upper(), &ut(&[&[2.0, 1.0], &[0.0, 2.0]]));

        let err = chol_upper(&sq(&[&[1.0, 2.0], &[2.0, 1.0]]), &mut c).unwrap_err();
        assert!(matches!(err, Error::NotPositiveDefinite { pivot: 1, .. }));
    }

    #[test]
    fn chol_rejects_asymmetric_input() {
        let x = sq(&[&[4.0, 2.0], &[2.1, 5.0]]);
        let err = chol_upper(&x, &mut OpCounter::new()).unwrap_err();
        assert_eq!(err, Error::NotSymmetric { row: 0, col: 1 });

        // round-off sized asymmetry is tolerated; upper triangle wins
        let x = sq(&[&[4.0, 2.0], &[2.0 + 1e-12, 5.0]]);
        let u = chol_upper(&x, &mut OpCounter::new()).unwrap();
        assert_eq!(u.as_upper(), &ut(&[&[2.0, 1.0], &[0.0, 2.0]]));
    }

    #[test]
    fn tri_inverse_examples() {
        let mut c = OpCounter::new();
        let r = tri_inverse(&UpperTriangular::identity(4), &mut c).unwrap();
        assert_eq!(r, UpperTriangular::identity(4));
        assert_eq!(c.trtri, 1);

        let r = tri_inverse(&ut(&[&[2.0, 1.0], &[0.0, 4.0]]), &mut c).unwrap();
        assert_eq!(r, ut(&[&[0.5, -0.125], &[0.0, 0.25]]));

        let err = tri_inverse(&ut(&[&[1.0, 5.0], &[0.0, 0.0]]), &mut c).unwrap_err();
        assert_eq!(err, Error::SingularMatrix { index: 1 });
    }

    #[test]
    fn tri_mul_examples() {
        let mut c = OpCounter::new();
        let u = ut(&[&[1.0, 2.0, 3.0], &[0.0, 4.0, 5.0], &[0.0, 0.0, 6.0]]);
        assert_eq!(
            tri_mul(&UpperTriangular::identity(3), &u, &mut c).unwrap(),
            u
        );

        let y = tri_mul(
            &ut(&[&[1.0, 1.0], &[0.0, 1.0]]),
            &ut(&[&[2.0, 0.0], &[0.0, 3.0]]),
            &mut c,
        )
        .unwrap();
        assert_eq!(y, ut(&[&[2.0, 3.0], &[0.0, 3.0]]));
        assert_eq!(c.trmm, 2);

        let err = tri_mul(
            &UpperTriangular::identity(2),
            &UpperTriangular::identity(3),
            &mut c,
        );
        assert_eq!(
            err.unwrap_err(),
            Error::DimensionMismatch {
                expected: 2,
                found: 3
            }
        );
        assert_eq!(c.trmm, 2);
    }

    #[test]
    fn gram_examples() {
        let mut c = OpCounter::new();
        assert_eq!(
            gram_ut(&UpperTriangular::identity(2), &mut c),
            SquareMatrix::identity(2)
        );
        assert_eq!(
            gram_ut(&ut(&[&[2.0, 1.0], &[0.0, 2.0]]), &mut c),
            sq(&[&[4.0, 2.0], &[2.0, 5.0]])
        );
        assert_eq!(
            gram_ut(&ut(&[&[1.0, 0.0], &[0.0, 3.0]]), &mut c),
            sq(&[&[1.0, 0.0], &[0.0, 9.0]])
        );

        assert_eq!(
            gram_vt(&UpperTriangular::identity(2), &mut c),
            SquareMatrix::identity(2)
        );
        assert_eq!(
            gram_vt(&ut(&[&[2.0, 1.0], &[0.0, 2.0]]), &mut c),
            sq(&[&[5.0, 2.0], &[2.0, 4.0]])
        );
        assert_eq!(gram_vt(&ut(&[&[3.0]]), &mut c), sq(&[&[9.0]]));
        assert_eq!(
            c,
            OpCounter {
                trmm: 6,
                ..Default::default()
            }
        );
    }

    #[test]
    fn norms_and_determinants() {
        assert_eq!(frobenius_norm_sq(SquareMatrix::identity(3).as_slice()), 3.0);
        assert_eq!(
            frobenius_norm_sq(ut(&[&[1.0, 2.0], &[0.0, 3.0]]).as_slice()),
            14.0
        );
        assert_eq!(frobenius_norm_sq(SquareMatrix::zeros(4).as_slice()), 0.0);

        assert_eq!(log_det_tri(&UpperTriangular::identity(5)).unwrap(), 0.0);
        let d = log_det_tri(&UpperTriangular::from_diagonal(&[2.0, 4.0]).unwrap()).unwrap();
        assert!((d - 8f64.ln()).abs() < 1e-15);
        let err = log_det_tri(&UpperTriangular::from_diagonal(&[1.0, 0.0]).unwrap());
        assert_eq!(err.unwrap_err(), Error::SingularMatrix { index: 1 });
    }

    #[test]
    fn constructors_validate() {
        assert!(matches!(
            UpperTriangular::from_rows(&[vec![1.0, 0.0], vec![1.0, 1.0]]),
            Err(Error::NotUpperTriangular { row: 1, col: 0 })
        ));
        assert!(matches!(
            SquareMatrix::from_rows(&[vec![1.0, f64::NAN], vec![0.0, 1.0]]),
            Err(Error::NonFinite { row: 0, col: 1 })
        ));
        assert!(SquareMatrix::from_row_major(0, vec![]).is_err());
        assert!(matches!(
            CholeskyFactor::from_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]]),
            Err(Error::NotPositiveDefinite { pivot: 1, .. })
        ));
    }

    #[test]
    fn solve_right_matches_explicit_inverse() {
        let x = ut(&[&[1.0, -2.0, 0.5], &[0.0, 3.0, 1.0], &[0.0, 0.0, 2.0]]);
        let u = ut(&[&[2.0, 0.3, -1.0], &[0.0, 1.5, 0.2], &[0.0, 0.0, 0.7]]);
        let mut c = OpCounter::new();
        let inv = tri_inverse(&u, &mut c).unwrap();
        let expected = tri_mul(&x, &inv, &mut c).unwrap();
        let got = solve_right_upper(&x, &u).unwrap();
        for (a, b) in got.as_slice().iter().zip(expected.as_slice()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn random_upper(m: usize) -> impl Strategy<Value = UpperTriangular> {
            (
                proptest::collection::vec(-1.0f64..1.0, m * m),
                proptest::collection::vec(0.5f64..2.0, m),
            )
                .prop_map(move |(mut vals, diag)| {
                    for i in 0..m {
                        for j in 0..i {
                            vals[i * m + j] = 0.0;
                        }
                        vals[i * m + i] = if i % 2 == 0 { diag[i] } else { -diag[i] };
                    }
                    UpperTriangular::from_row_major(m, vals).unwrap()
                })
        }

        fn rel_err(a: &[f64], b: &[f64]) -> f64 {
            let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
            (diff / frobenius_norm_sq(b).max(f64::MIN_POSITIVE)).sqrt()
        }

        proptest! {
            #[test]
            fn chol_reconstructs_spd(m in 1usize..=30, seed in proptest::collection::vec(-1.0f64..1.0, 900)) {
                let g = &seed[..m * m];
                let mut x = naive_product(&transpose(g, m), g, m);
                for i in 0..m {
                    x[i * m + i] += m as f64;
                }
                let x = SquareMatrix::from_row_major(m, x).unwrap();
                let u = chol_upper(&x, &mut OpCounter::new()).unwrap();
                let back = naive_product(&transpose(u.as_slice(), m), u.as_slice(), m);
                prop_assert!(rel_err(&back, x.as_slice()) < 1e-10);
            }

            #[test]
            fn tri_inverse_is_involution(u in (1usize..=12).prop_flat_map(random_upper)) {
                let mut c = OpCounter::new();
                let r = tri_inverse(&u, &mut c).unwrap();
                let back = tri_inverse(&r, &mut c).unwrap();
                prop_assert!(rel_err(back.as_slice(), u.as_slice()) < 1e-10);
                let prod = naive_product(r.as_slice(), u.as_slice(), u.dim());
                prop_assert!(rel_err(&prod, SquareMatrix::identity(u.dim()).as_slice()) < 1e-10);
                prop_assert_eq!(c, OpCounter { trtri: 2, ..Default::default() });
            }

            #[test]
            fn tri_mul_associates(
                (a, b, c) in (1usize..=10).prop_flat_map(|m| (random_upper(m), random_upper(m), random_upper(m)))
            ) {
                let mut k = OpCounter::new();
                let left = tri_mul(&tri_mul(&a, &b, &mut k).unwrap(), &c, &mut k).unwrap();
                let right = tri_mul(&a, &tri_mul(&b, &c, &mut k).unwrap(), &mut k).unwrap();
                prop_assert!(rel_err(left.as_slice(), right.as_slice()) < 1e-12);
                prop_assert_eq!(k.trmm, 4);
            }

            #[test]
            fn grams_match_naive_products(u in (1usize..=15).prop_flat_map(random_upper)) {
                let m = u.dim();
                let mut c = OpCounter::new();
                let ut_u = gram_ut(&u, &mut c);
                let naive = naive_product(&transpose(u.as_slice(), m), u.as_slice(), m);
                prop_assert!(rel_err(ut_u.as_slice(), &naive) < 1e-14);
                let v_vt = gram_vt(&u, &mut c);
                let naive = naive_product(u.as_slice(), &transpose(u.as_slice(), m), m);
                prop_assert!(rel_err(v_vt.as_slice(), &naive) < 1e-14);
                prop_assert_eq!(ut_u.asymmetry(), 0.0);
                prop_assert_eq!(v_vt.asymmetry(), 0.0);
                prop_assert_eq!(c, OpCounter { trmm: 2, ..Default::default() });
            }
        }
    }
}
