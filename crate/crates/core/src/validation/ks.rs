//! One- and two-sample Kolmogorov-Smirnov tests with asymptotic p-values.

use serde::Serialize;

use crate::error::{Error, Result};

pub const MIN_KS_SAMPLES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsResult {
    /// Supremum distance between the two CDFs.
    pub statistic: f64,
    pub n_samples: usize,
    /// Size of the second sample for the two-sample test.
    pub n_samples_other: Option<usize>,
    pub pvalue: f64,
}

fn sorted(xs: &[f64]) -> Result<Vec<f64>> {
    if xs.iter().any(|x| x.is_nan()) {
        return Err(Error::InvalidParameter("NaN in KS sample".into()));
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

fn check_len(len: usize) -> Result<()> {
    if len < MIN_KS_SAMPLES {
        return Err(Error::TooFewSamples {
            needed: MIN_KS_SAMPLES,
            got: len,
        });
    }
    Ok(())
}

/// `D_n = sup |F_n(x) - F(x)|`, evaluated exactly at the sorted sample.
pub fn ks_one_sample<F: Fn(f64) -> f64>(draws: &[f64], cdf: F) -> Result<KsResult> {
    check_len(draws.len())?;
    let xs = sorted(draws)?;
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(KsResult {
        statistic: d,
        n_samples: xs.len(),
        n_samples_other: None,
        pvalue: kolmogorov_pvalue(d, n),
    })
}

/// Two-sample statistic `sup |F_a(x) - F_b(x)|`; ties are consumed together.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    check_len(a.len())?;
    check_len(b.len())?;
    let (xa, xb) = (sorted(a)?, sorted(b)?);
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0f64;
    while i < xa.len() && j < xb.len() {
        let x = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] == x {
            i += 1;
        }
        while j < xb.len() && xb[j] == x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let effective = na * nb / (na + nb);
    Ok(KsResult {
        statistic: d,
        n_samples: xa.len(),
        n_samples_other: Some(xb.len()),
        pvalue: kolmogorov_pvalue(d, effective),
    })
}

/// Asymptotic `P(D > d)` for effective sample size `n`, using Stephens'
/// small-sample correction `lambda = (sqrt(n) + 0.12 + 0.11 / sqrt(n)) d`.
pub fn kolmogorov_pvalue(d: f64, n: f64) -> f64 {
    let sn = n.sqrt();
    kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d)
}

/// `Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2)`.
///
/// Below `lambda = 1.18` the alternating series converges slowly, so the
/// Jacobi-theta form of the CDF is summed instead.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        let y = (-std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda)).exp();
        let cdf = (2.0 * std::f64::consts::PI).sqrt() / lambda
            * (y + y.powi(9) + y.powi(25) + y.powi(49) + y.powi(81));
        return (1.0 - cdf).clamp(0.0, 1.0);
    }
    let x = (-2.0 * lambda * lambda).exp();
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100u32 {
        let term = x.powi((k * k) as i32);
        sum += sign * term;
        if term < 1e-17 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{draw_std_normal, RngStream};

    #[test]
    fn perfect_fit_bound() {
        let n = 1000;
        let draws: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let r = ks_one_sample(&draws, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(r.statistic <= 1.0 / n as f64);
    }

    #[test]
    fn uniform_self_consistency() {
        let mut rng = RngStream::new(31);
        let draws: Vec<f64> = (0..100_000).map(|_| rng.uniform()).collect();
        let r = ks_one_sample(&draws, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(r.pvalue > 0.001, "p = {}", r.pvalue);
    }

    #[test]
    fn degenerate_sample() {
        let draws = vec![0.3; 50];
        let r = ks_one_sample(&draws, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!((r.statistic - 0.7).abs() < 1e-15);
    }

    #[test]
    fn two_sample_edge_cases() {
        let a: Vec<f64> = (0..20).map(|i| i as f64).collect();
        assert_eq!(ks_two_sample(&a, &a).unwrap().statistic, 0.0);
        let b: Vec<f64> = (0..30).map(|i| 100.0 + i as f64).collect();
        let r = ks_two_sample(&a, &b).unwrap();
        assert_eq!(r.statistic, 1.0);
        assert_eq!(r.n_samples_other, Some(30));
        assert!(r.pvalue < 1e-6);
    }

    #[test]
    fn two_normal_samples_agree() {
        let mut rng = RngStream::new(32);
        let a: Vec<f64> = (0..100_000).map(|_| draw_std_normal(&mut rng)).collect();
        let b: Vec<f64> = (0..100_000).map(|_| draw_std_normal(&mut rng)).collect();
        assert!(ks_two_sample(&a, &b).unwrap().pvalue > 0.001);
    }

    #[test]
    fn too_few_samples() {
        let err = ks_one_sample(&[0.1; 9], |x| x).unwrap_err();
        assert_eq!(err, Error::TooFewSamples { needed: 10, got: 9 });
        assert!(ks_two_sample(&[0.1; 10], &[0.2; 3]).is_err());
    }

    #[test]
    fn survival_function_is_continuous_and_monotone() {
        // the two branches meet at 1.18
        let lo = kolmogorov_survival(1.18 - 1e-12);
        let hi = kolmogorov_survival(1.18);
        assert!((lo - hi).abs() < 1e-10, "{lo} vs {hi}");
        // Q(1.3581) = 0.05 and Q(1.9495) = 0.001 (tabulated critical values)
        assert!((kolmogorov_survival(1.3581) - 0.05).abs() < 1e-4);
        assert!((kolmogorov_survival(1.9495) - 0.001).abs() < 1e-5);
        let mut prev = 1.0;
        for k in 1..400 {
            let q = kolmogorov_survival(k as f64 * 0.01);
            assert!(q <= prev + 1e-15);
            prev = q;
        }
    }

    #[test]
    fn alpha_calibration() {
        // Same-law pairs should clear alpha = 0.001 in at least 99 of 100 runs.
        let passes = (0..100u64)
            .filter(|&s| {
                let mut rng = RngStream::with_stream(77, s);
                let a: Vec<f64> = (0..2000).map(|_| draw_std_normal(&mut rng)).collect();
                let b: Vec<f64> = (0..2000).map(|_| draw_std_normal(&mut rng)).collect();
                ks_two_sample(&a, &b).unwrap().pvalue > 0.001
            })
            .count();
        assert!(passes >= 99, "{passes}/100");
    }
}
