//! Wishart and inverse-Wishart samplers built on Bartlett-type factorizations.
//!
//! Two routes to an inverse-Wishart draw `B ~ IW_m(n, Omega)`:
//!
//! * **indirect** ([`rinvwishart_indirect`]): draw a Cholesky-Wishart factor
//!   `U_A = Z U_Sigma`, invert it and form `B = V V^T` with `V = U_A^{-1}`.
//! * **direct** ([`rinvwishart_direct`]): draw a second Bartlett-type factor
//!   `Z` whose diagonal is chi with `n - m + j` degrees of freedom and return
//!   `U_B = Z^{-1} U_Omega`, already the upper Cholesky factor of `B`.
//!
//! Which is cheaper depends on whether the scale was given as a covariance
//! (`Sigma`, `U_Sigma`) or a precision (`Omega`, `U_Omega`); see
//! [`recommend_algorithm`].
//!
//! Both Bartlett loops consume the random source column by column, the
//! off-diagonal normals of column `j` before its chi diagonal. That order is
//! part of the seed-reproducibility contract.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    chol_upper, gram_ut, gram_vt, tri_inverse, tri_mul, CholeskyFactor, OpCounter, SquareMatrix,
    UpperTriangular,
};
use crate::random::{DegreesOfFreedom, ScalarSource};

/// The four ways a scale matrix may be handed to a sampler.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Parameterization {
    /// `Sigma`
    Covariance,
    /// `U_Sigma`
    CovarianceFactor,
    /// `Omega = Sigma^{-1}`
    Precision,
    /// `U_Omega`
    PrecisionFactor,
}

impl Parameterization {
    pub const ALL: [Parameterization; 4] = [
        Parameterization::Covariance,
        Parameterization::CovarianceFactor,
        Parameterization::Precision,
        Parameterization::PrecisionFactor,
    ];

    pub fn from_flags(iscov: bool, ischolu: bool) -> Self {
        match (iscov, ischolu) {
            (true, false) => Parameterization::Covariance,
            (true, true) => Parameterization::CovarianceFactor,
            (false, false) => Parameterization::Precision,
            (false, true) => Parameterization::PrecisionFactor,
        }
    }

    pub fn iscov(self) -> bool {
        matches!(
            self,
            Parameterization::Covariance | Parameterization::CovarianceFactor
        )
    }

    pub fn ischolu(self) -> bool {
        matches!(
            self,
            Parameterization::CovarianceFactor | Parameterization::PrecisionFactor
        )
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Parameterization::Covariance => "Sigma",
            Parameterization::CovarianceFactor => "U_Sigma",
            Parameterization::Precision => "Omega",
            Parameterization::PrecisionFactor => "U_Omega",
        }
    }
}

impl fmt::Display for Parameterization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScaleMatrix {
    Dense(SquareMatrix),
    Factor(CholeskyFactor),
}

impl ScaleMatrix {
    pub fn dim(&self) -> usize {
        match self {
            ScaleMatrix::Dense(s) => s.dim(),
            ScaleMatrix::Factor(u) => u.dim(),
        }
    }
}

/// Scale matrix plus the flags saying which of `Sigma`, `U_Sigma`, `Omega`,
/// `U_Omega` it is.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleParam {
    matrix: ScaleMatrix,
    iscov: bool,
}

impl ScaleParam {
    /// Interprets `s` according to the flags. With `ischolu` the matrix must
    /// be upper triangular with a positive diagonal; otherwise positive
    /// definiteness is only checked when the matrix is factored.
    pub fn new(s: SquareMatrix, iscov: bool, ischolu: bool) -> Result<Self> {
        let matrix = if ischolu {
            let dim = s.dim();
            let u = UpperTriangular::from_row_major(dim, s.into_vec())?;
            ScaleMatrix::Factor(CholeskyFactor::new(u)?)
        } else {
            ScaleMatrix::Dense(s)
        };
        Ok(Self { matrix, iscov })
    }

    pub fn covariance(sigma: SquareMatrix) -> Self {
        Self {
            matrix: ScaleMatrix::Dense(sigma),
            iscov: true,
        }
    }

    pub fn covariance_factor(u_sigma: CholeskyFactor) -> Self {
        Self {
            matrix: ScaleMatrix::Factor(u_sigma),
            iscov: true,
        }
    }

    pub fn precision(omega: SquareMatrix) -> Self {
        Self {
            matrix: ScaleMatrix::Dense(omega),
            iscov: false,
        }
    }

    pub fn precision_factor(u_omega: CholeskyFactor) -> Self {
        Self {
            matrix: ScaleMatrix::Factor(u_omega),
            iscov: false,
        }
    }

    pub fn matrix(&self) -> &ScaleMatrix {
        &self.matrix
    }

    pub fn iscov(&self) -> bool {
        self.iscov
    }

    pub fn ischolu(&self) -> bool {
        matches!(self.matrix, ScaleMatrix::Factor(_))
    }

    pub fn parameterization(&self) -> Parameterization {
        Parameterization::from_flags(self.iscov, self.ischolu())
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

/// Validated sampler inputs: dimension, degrees of freedom, scale and
/// whether to return the upper Cholesky factor instead of the matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplerSpec {
    m: usize,
    n: DegreesOfFreedom,
    scale: ScaleParam,
    retcholu: bool,
}

impl SamplerSpec {
    pub fn new(m: usize, n: f64, scale: ScaleParam, retcholu: bool) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter(
                "dimension m must be at least 1".into(),
            ));
        }
        let n = check_dof(m, n)?;
        if scale.dim() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: scale.dim(),
            });
        }
        Ok(Self {
            m,
            n,
            scale,
            retcholu,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> f64 {
        self.n.get()
    }

    pub fn scale(&self) -> &ScaleParam {
        &self.scale
    }

    pub fn retcholu(&self) -> bool {
        self.retcholu
    }

    pub fn with_retcholu(mut self, retcholu: bool) -> Self {
        self.retcholu = retcholu;
        self
    }
}

/// `n > m - 1` is required for a nonsingular draw.
pub fn check_dof(m: usize, n: f64) -> Result<DegreesOfFreedom> {
    let dof = DegreesOfFreedom::new(n)?;
    if !(n > m as f64 - 1.0) {
        return Err(Error::InvalidDegreesOfFreedom {
            value: n,
            reason: "requires n > m - 1",
        });
    }
    Ok(dof)
}

/// Upper triangular `Z` with normal off-diagonals and chi diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct BartlettFactor(UpperTriangular);

impl BartlettFactor {
    pub fn as_upper(&self) -> &UpperTriangular {
        &self.0
    }

    pub fn into_upper(self) -> UpperTriangular {
        self.0
    }
}

/// A draw is either the full matrix or its upper Cholesky factor.
#[derive(Debug, Clone, PartialEq)]
pub enum Sample {
    Matrix(SquareMatrix),
    Factor(CholeskyFactor),
}

impl Sample {
    pub fn dim(&self) -> usize {
        match self {
            Sample::Matrix(x) => x.dim(),
            Sample::Factor(u) => u.dim(),
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        match self {
            Sample::Matrix(x) => x.as_slice(),
            Sample::Factor(u) => u.as_slice(),
        }
    }

    pub fn is_factor(&self) -> bool {
        matches!(self, Sample::Factor(_))
    }

    /// The full matrix, squaring a factor with `U^T U` if needed.
    pub fn into_matrix(self) -> SquareMatrix {
        match self {
            Sample::Matrix(x) => x,
            Sample::Factor(u) => gram_ut(&u, &mut OpCounter::new()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Indirect,
    Direct,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Indirect => "indirect",
            Algorithm::Direct => "direct",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "indirect" => Ok(Algorithm::Indirect),
            "direct" => Ok(Algorithm::Direct),
            other => Err(Error::InvalidParameter(format!(
                "unknown algorithm {other:?}"
            ))),
        }
    }
}

fn draw_bartlett<R, F>(rng: &mut R, m: usize, n: f64, diag_dof: F) -> Result<BartlettFactor>
where
    R: ScalarSource + ?Sized,
    F: Fn(usize) -> f64,
{
    check_dof(m, n)?;
    let mut z = vec![0.0; m * m];
    for j in 0..m {
        for i in 0..j {
            z[i * m + j] = rng.std_normal();
        }
        let k = DegreesOfFreedom::new(diag_dof(j))?;
        let d = rng.chi(k);
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::NumericalFailure(format!(
                "chi draw with {} degrees of freedom returned {d}",
                k.get()
            )));
        }
        z[j * m + j] = d;
    }
    Ok(BartlettFactor(UpperTriangular::from_raw(m, z)))
}

/// `Z ~ CholWishart_m(n, I)`: diagonal `z_jj ~ chi(n + 1 - j)` for 1-based `j`.
pub fn draw_bartlett_wishart<R: ScalarSource + ?Sized>(
    rng: &mut R,
    m: usize,
    n: f64,
) -> Result<BartlettFactor> {
    draw_bartlett(rng, m, n, |j| n - j as f64)
}

/// `Z` with `Z^{-1} ~ CholInvWishart_m(n, I)`: diagonal `z_jj ~ chi(n - m + j)`
/// for 1-based `j`.
pub fn draw_bartlett_invwishart<R: ScalarSource + ?Sized>(
    rng: &mut R,
    m: usize,
    n: f64,
) -> Result<BartlettFactor> {
    draw_bartlett(rng, m, n, |j| n - m as f64 + j as f64 + 1.0)
}

/// Upper Cholesky factor of `S` or of `S^{-1}`, where `S` is given either as a
/// dense matrix or as its own upper factor.
///
/// Inversion goes through `C = U^{-1}`, `P = C C^T`, `chol(P)`: one TRTRI,
/// one TRMM and one POTRF on top of the factorization of `S` (if any).
pub fn cholesky_upper_param(
    scale: &ScaleParam,
    invert: bool,
    counter: &mut OpCounter,
) -> Result<CholeskyFactor> {
    let u = match scale.matrix() {
        ScaleMatrix::Factor(u) if !invert => return Ok(u.clone()),
        ScaleMatrix::Dense(s) if !invert => return chol_upper(s, counter),
        ScaleMatrix::Factor(u) => u.clone(),
        ScaleMatrix::Dense(s) => chol_upper(s, counter)?,
    };
    let c = tri_inverse(&u, counter)?;
    let p = gram_vt(&c, counter);
    chol_upper(&p, counter)
}

fn ensure_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// `U_A = Z U_Sigma ~ CholWishart_m(n, U_Sigma)`.
pub fn rwishart_chol<R: ScalarSource + ?Sized>(
    rng: &mut R,
    m: usize,
    n: f64,
    u_sigma: &CholeskyFactor,
    counter: &mut OpCounter,
) -> Result<CholeskyFactor> {
    ensure_dim(m, u_sigma.dim())?;
    let z = draw_bartlett_wishart(rng, m, n)?;
    wishart_factor_from(&z, u_sigma, counter)
}

/// Deterministic half of [`rwishart_chol`].
pub fn wishart_factor_from(
    z: &BartlettFactor,
    u_sigma: &CholeskyFactor,
    counter: &mut OpCounter,
) -> Result<CholeskyFactor> {
    CholeskyFactor::new(tri_mul(z.as_upper(), u_sigma, counter)?)
}

/// `U_B = Z^{-1} U_Omega ~ CholInvWishart_m(n, U_Omega)`.
pub fn rinvwishart_chol<R: ScalarSource + ?Sized>(
    rng: &mut R,
    m: usize,
    n: f64,
    u_omega: &CholeskyFactor,
    counter: &mut OpCounter,
) -> Result<CholeskyFactor> {
    ensure_dim(m, u_omega.dim())?;
    let z = draw_bartlett_invwishart(rng, m, n)?;
    invwishart_factor_from(&z, u_omega, counter)
}

/// Deterministic half of [`rinvwishart_chol`].
pub fn invwishart_factor_from(
    z: &BartlettFactor,
    u_omega: &CholeskyFactor,
    counter: &mut OpCounter,
) -> Result<CholeskyFactor> {
    let c = tri_inverse(z.as_upper(), counter)?;
    CholeskyFactor::new(tri_mul(&c, u_omega, counter)?)
}

/// Inverse-Wishart draw through a Wishart factor and its inverse.
pub fn rinvwishart_indirect<R: ScalarSource + ?Sized>(
    rng: &mut R,
    spec: &SamplerSpec,
    counter: &mut OpCounter,
) -> Result<Sample> {
    let scale = spec.scale();
    let u_sigma = cholesky_upper_param(scale, !scale.iscov(), counter)?;
    let u_a = rwishart_chol(rng, spec.m(), spec.n(), &u_sigma, counter)?;
    let v = tri_inverse(&u_a, counter)?;
    let b = gram_vt(&v, counter);
    if spec.retcholu() {
        Ok(Sample::Factor(chol_upper(&b, counter)?))
    } else {
        Ok(Sample::Matrix(b))
    }
}

/// Inverse-Wishart draw that generates the Cholesky factor directly.
pub fn rinvwishart_direct<R: ScalarSource + ?Sized>(
    rng: &mut R,
    spec: &SamplerSpec,
    counter: &mut OpCounter,
) -> Result<Sample> {
    let scale = spec.scale();
    let u_omega = cholesky_upper_param(scale, scale.iscov(), counter)?;
    let u_b = rinvwishart_chol(rng, spec.m(), spec.n(), &u_omega, counter)?;
    if spec.retcholu() {
        Ok(Sample::Factor(u_b))
    } else {
        Ok(Sample::Matrix(gram_ut(&u_b, counter)))
    }
}

/// Inverse-Wishart draw with the chosen algorithm.
pub fn rinvwishart<R: ScalarSource + ?Sized>(
    rng: &mut R,
    spec: &SamplerSpec,
    algorithm: Algorithm,
    counter: &mut OpCounter,
) -> Result<Sample> {
    match algorithm {
        Algorithm::Indirect => rinvwishart_indirect(rng, spec, counter),
        Algorithm::Direct => rinvwishart_direct(rng, spec, counter),
    }
}

/// Wishart draw `A = U_A^T U_A` (or `U_A` itself). A precision-parameterized
/// scale is inverted first, the same way the indirect sampler does.
pub fn rwishart<R: ScalarSource + ?Sized>(
    rng: &mut R,
    spec: &SamplerSpec,
    counter: &mut OpCounter,
) -> Result<Sample> {
    let scale = spec.scale();
    let u_sigma = cholesky_upper_param(scale, !scale.iscov(), counter)?;
    let u_a = rwishart_chol(rng, spec.m(), spec.n(), &u_sigma, counter)?;
    if spec.retcholu() {
        Ok(Sample::Factor(u_a))
    } else {
        Ok(Sample::Matrix(gram_ut(&u_a, counter)))
    }
}

/// Cheaper algorithm for the given parameterization: indirect for a
/// covariance scale, direct for a precision scale.
pub fn recommend_algorithm(scale: &ScaleParam) -> Algorithm {
    recommend_for(scale.parameterization())
}

pub fn recommend_for(param: Parameterization) -> Algorithm {
    if param.iscov() {
        Algorithm::Indirect
    } else {
        Algorithm::Direct
    }
}
