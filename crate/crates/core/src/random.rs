//! Seeded random streams and the scalar variates the Bartlett-type
//! decompositions need: standard normal, gamma and chi.
//!
//! The generator is xoshiro256++ seeded from a `u64` through SplitMix64
//! (`rand_xoshiro::Xoshiro256PlusPlus::seed_from_u64`). Independent streams
//! for parallel work are the base stream advanced by `stream_id` calls of
//! the 2^128-step `jump()`, so streams never overlap.
//!
//! Consumption per variate:
//!
//! * uniform: one raw `u64`, mapped to the open interval (0, 1) as
//!   `((x >> 12) + 0.5) * 2^-52`;
//! * normal: Box-Muller, exactly two uniforms, cosine branch only;
//! * gamma: Marsaglia-Tsang rejection for shape >= 1, each attempt one
//!   normal and (unless the proposal is out of range) one uniform. Shape
//!   below one draws gamma(shape + 1) and multiplies by `u^(1/shape)`;
//! * chi(k): `sqrt(gamma(k / 2, 2))`.

use std::f64::consts::TAU;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{Error, Result};

/// Strictly positive, finite, real-valued degrees of freedom.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct DegreesOfFreedom(f64);

impl DegreesOfFreedom {
    pub fn new(value: f64) -> Result<Self> {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::InvalidDegreesOfFreedom {
                value,
                reason: "must be positive and finite",
            });
        }
        Ok(Self(value))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// Source of the two scalar laws the Bartlett loops consume.
///
/// [`RngStream`] is the production implementation; tests substitute
/// scripted or recording sources to pin down the draw order.
pub trait ScalarSource {
    fn std_normal(&mut self) -> f64;
    fn chi(&mut self, k: DegreesOfFreedom) -> f64;
}

/// Deterministic random stream. Same `(seed, stream_id)` gives a
/// bit-identical sequence on every platform.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    inner: Xoshiro256PlusPlus,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    /// Cost is linear in `stream_id`.
    pub fn with_stream(seed: u64, stream_id: u64) -> Self {
        let mut inner = Xoshiro256PlusPlus::seed_from_u64(seed);
        for _ in 0..stream_id {
            inner.jump();
        }
        Self {
            seed,
            stream_id,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on the open interval (0, 1).
    pub fn uniform(&mut self) -> f64 {
        ((self.inner.next_u64() >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
    }
}

impl ScalarSource for RngStream {
    fn std_normal(&mut self) -> f64 {
        draw_std_normal(self)
    }

    fn chi(&mut self, k: DegreesOfFreedom) -> f64 {
        chi_from_gamma(self, k.get())
    }
}

/// One standard normal variate (Box-Muller, two uniforms).
pub fn draw_std_normal(rng: &mut RngStream) -> f64 {
    let u1 = rng.uniform();
    let u2 = rng.uniform();
    (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
}

/// One gamma variate with the given shape and scale.
pub fn draw_gamma(rng: &mut RngStream, shape: f64, scale: f64) -> Result<f64> {
    if !(shape > 0.0) || !shape.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "gamma shape must be positive, got {shape}"
        )));
    }
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "gamma scale must be positive, got {scale}"
        )));
    }
    Ok(gamma_unit(rng, shape) * scale)
}

/// One chi variate with `k` degrees of freedom; `k` may be non-integer.
pub fn draw_chi(rng: &mut RngStream, k: f64) -> Result<f64> {
    let k = DegreesOfFreedom::new(k)?;
    Ok(chi_from_gamma(rng, k.get()))
}

fn chi_from_gamma(rng: &mut RngStream, k: f64) -> f64 {
    (gamma_unit(rng, 0.5 * k) * 2.0).sqrt()
}

fn gamma_unit(rng: &mut RngStream, shape: f64) -> f64 {
    if shape < 1.0 {
        let boosted = marsaglia_tsang(rng, shape + 1.0);
        let u = rng.uniform();
        return boosted * u.powf(1.0 / shape);
    }
    marsaglia_tsang(rng, shape)
}

fn marsaglia_tsang(rng: &mut RngStream, shape: f64) -> f64 {
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x = draw_std_normal(rng);
        let t = 1.0 + c * x;
        if t <= 0.0 {
            continue;
        }
        let v = t * t * t;
        let u = rng.uniform();
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 || u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::validation::{chi_square_cdf, ks_one_sample};
    use statrs::function::erf::erf;
    use statrs::function::gamma::gamma;

    const N: usize = 1_000_000;

    fn mean_var(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
        (mean, var)
    }

    #[test]
    fn normal_moments() {
        let mut rng = RngStream::new(11);
        let xs: Vec<f64> = (0..N).map(|_| draw_std_normal(&mut rng)).collect();
        let (mean, var) = mean_var(&xs);
        assert!(mean.abs() < 0.005, "mean {mean}");
        assert!((var - 1.0).abs() < 0.01, "var {var}");
    }

    #[test]
    fn same_seed_same_stream() {
        let mut a = RngStream::new(99);
        let mut b = RngStream::new(99);
        for _ in 0..100 {
            assert_eq!(
                draw_std_normal(&mut a).to_bits(),
                draw_std_normal(&mut b).to_bits()
            );
        }
        let mut c = RngStream::with_stream(99, 1);
        let mut a = RngStream::new(99);
        assert_ne!(a.next_u64(), c.next_u64());
    }

    #[test]
    fn pinned_sequence() {
        // Freezes the generator definition; changing it breaks seed reproducibility.
        let mut rng = RngStream::new(0);
        let first: Vec<u64> = (0..3).map(|_| rng.next_u64()).collect();
        let mut again = Xoshiro256PlusPlus::seed_from_u64(0);
        assert_eq!(first, (0..3).map(|_| again.next_u64()).collect::<Vec<_>>());
    }

    #[test]
    fn uniform_is_open() {
        let lo = 0.5 * (1.0 / (1u64 << 52) as f64);
        assert!(lo > 0.0);
        let hi = ((u64::MAX >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64);
        assert!(hi < 1.0);
    }

    #[test]
    fn chi_two_mean() {
        let mut rng = RngStream::new(5);
        let xs: Vec<f64> = (0..N).map(|_| draw_chi(&mut rng, 2.0).unwrap()).collect();
        let (mean, _) = mean_var(&xs);
        let expected = 2f64.sqrt() * gamma(1.5) / gamma(1.0);
        assert!((expected - (std::f64::consts::PI / 2.0).sqrt()).abs() < 1e-12);
        assert!((mean - expected).abs() < 0.01, "mean {mean}");
        assert!(xs.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn chi_one_is_half_normal() {
        let mut rng = RngStream::new(6);
        let xs: Vec<f64> = (0..N).map(|_| draw_chi(&mut rng, 1.0).unwrap()).collect();
        let ks = ks_one_sample(&xs, |x| erf(x / 2f64.sqrt())).unwrap();
        assert!(ks.statistic < 0.005, "D = {}", ks.statistic);
    }

    #[test]
    fn invalid_parameters() {
        let mut rng = RngStream::new(1);
        assert!(matches!(
            draw_chi(&mut rng, 0.0),
            Err(Error::InvalidDegreesOfFreedom { .. })
        ));
        assert!(matches!(
            draw_chi(&mut rng, f64::NAN),
            Err(Error::InvalidDegreesOfFreedom { .. })
        ));
        assert!(matches!(
            draw_gamma(&mut rng, -1.0, 1.0),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            draw_gamma(&mut rng, 1.0, 0.0),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn gamma_exponential_mean() {
        let mut rng = RngStream::new(7);
        let xs: Vec<f64> = (0..N)
            .map(|_| draw_gamma(&mut rng, 1.0, 2.0).unwrap())
            .collect();
        let (mean, _) = mean_var(&xs);
        assert!((mean - 2.0).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn gamma_half_shape_is_squared_normal() {
        let mut rng = RngStream::new(8);
        let xs: Vec<f64> = (0..N)
            .map(|_| draw_gamma(&mut rng, 0.5, 2.0).unwrap())
            .collect();
        // P(Z^2 <= x) = erf(sqrt(x / 2))
        let ks =
            ks_one_sample(&xs, |x| if x <= 0.0 { 0.0 } else { erf((x / 2.0).sqrt()) }).unwrap();
        assert!(ks.statistic < 0.005, "D = {}", ks.statistic);
    }

    #[test]
    fn chi_squared_law_for_real_dof() {
        let ks_values = [0.5, 1.0, 3.0, 7.5, 20.0];
        let alpha = 0.001;
        for (i, &k) in ks_values.iter().enumerate() {
            let mut rng = RngStream::with_stream(2024, i as u64);
            let xs: Vec<f64> = (0..50_000)
                .map(|_| draw_chi(&mut rng, k).unwrap().powi(2))
                .collect();
            let dof = DegreesOfFreedom::new(k).unwrap();
            let ks = ks_one_sample(&xs, |x| chi_square_cdf(x, dof).unwrap()).unwrap();
            assert!(ks.pvalue > alpha, "k = {k}: p = {}", ks.pvalue);
        }
    }
}
