//! Monte Carlo means of the samplers against their closed-form expectations.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{frobenius_norm_sq, gram_ut, OpCounter, SquareMatrix};
use crate::random::ScalarSource;
use crate::samplers::{cholesky_upper_param, rinvwishart, rwishart, Algorithm, SamplerSpec};

/// Below this many draws a report is still produced but flagged.
pub const MIN_CONFIDENT_SAMPLES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReport {
    #[serde(serialize_with = "serialize_rows")]
    pub sample_mean: SquareMatrix,
    #[serde(serialize_with = "serialize_rows")]
    pub target: SquareMatrix,
    /// `||sample_mean - target||_F / ||target||_F`
    pub relative_error: f64,
    pub n_samples: usize,
    pub below_confidence_threshold: bool,
}

fn serialize_rows<S: serde::Serializer>(x: &SquareMatrix, s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(x.rows())
}

impl MomentReport {
    fn new(sum: Vec<f64>, n_samples: usize, target: SquareMatrix) -> Result<Self> {
        let m = target.dim();
        let inv = 1.0 / n_samples as f64;
        let sample_mean =
            SquareMatrix::from_row_major(m, sum.into_iter().map(|v| v * inv).collect())?;
        let diff = sample_mean.sub(&target)?;
        let relative_error =
            (frobenius_norm_sq(diff.as_slice()) / frobenius_norm_sq(target.as_slice())).sqrt();
        Ok(Self {
            sample_mean,
            target,
            relative_error,
            n_samples,
            below_confidence_threshold: n_samples < MIN_CONFIDENT_SAMPLES,
        })
    }
}

fn accumulate<F>(m: usize, n_samples: usize, mut draw: F) -> Result<Vec<f64>>
where
    F: FnMut() -> Result<SquareMatrix>,
{
    if n_samples == 0 {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    let mut sum = vec![0.0; m * m];
    for _ in 0..n_samples {
        let x = draw()?;
        for (s, v) in sum.iter_mut().zip(x.as_slice()) {
            *s += v;
        }
    }
    Ok(sum)
}

/// Mean of `n_samples` Wishart draws against `n Sigma`.
pub fn mc_mean_wishart<R: ScalarSource + ?Sized>(
    rng: &mut R,
    spec: &SamplerSpec,
    n_samples: usize,
) -> Result<MomentReport> {
    let scale = spec.scale();
    let u_sigma = cholesky_upper_param(scale, !scale.iscov(), &mut OpCounter::new())?;
    let target = gram_ut(&u_sigma, &mut OpCounter::new()).scaled(spec.n());
    let sum = accumulate(spec.m(), n_samples, || {
        Ok(rwishart(rng, spec, &mut OpCounter::new())?.into_matrix())
    })?;
    MomentReport::new(sum, n_samples, target)
}

/// Mean of `n_samples` inverse-Wishart draws against `Omega / (n - m - 1)`.
pub fn mc_mean_invwishart<R: ScalarSource + ?Sized>(
    rng: &mut R,
    spec: &SamplerSpec,
    algorithm: Algorithm,
    n_samples: usize,
) -> Result<MomentReport> {
    let (m, n) = (spec.m(), spec.n());
    if !(n > m as f64 + 1.0) {
        return Err(Error::MeanUndefined { n, m });
    }
    let scale = spec.scale();
    let u_omega = cholesky_upper_param(scale, scale.iscov(), &mut OpCounter::new())?;
    let target = gram_ut(&u_omega, &mut OpCounter::new()).scaled(1.0 / (n - m as f64 - 1.0));
    let sum = accumulate(m, n_samples, || {
        Ok(rinvwishart(rng, spec, algorithm, &mut OpCounter::new())?.into_matrix())
    })?;
    MomentReport::new(sum, n_samples, target)
}
