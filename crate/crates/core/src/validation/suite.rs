//! The statistical and numerical checks behind `invwishart validate`.
//!
//! Every check draws from its own stream `(seed, 16 * index + k)`, where
//! `index` is the check's position in [`CHECKS`]. Filtering with `--only` or
//! running on several threads therefore never changes a statistic.
//! Hypothesis tests use `alpha = 0.001`, Bonferroni-corrected over the
//! entries or diagonal positions tested together.

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::bench::{self, BenchConfig};
use crate::densities::{
    logjac_chol, logjac_tri_inverse, logkernel_cholinvwishart, logkernel_cholwishart,
    logkernel_invwishart, logkernel_wishart,
};
use crate::error::{Error, Result};
use crate::linalg::{
    chol_upper, gram_ut, tri_inverse, CholeskyFactor, OpCounter, SquareMatrix, UpperTriangular,
};
use crate::opcount;
use crate::random::{draw_std_normal, DegreesOfFreedom, RngStream};
use crate::samplers::{
    cholesky_upper_param, draw_bartlett_invwishart, draw_bartlett_wishart, invwishart_factor_from,
    rinvwishart, rinvwishart_chol, rwishart, rwishart_chol, Algorithm, Parameterization,
    SamplerSpec, ScaleParam,
};

use super::{
    chi_square_cdf, fd_logdet_jacobian, gamma_cdf, inverse_gamma_cdf, ks_one_sample, ks_two_sample,
    mc_mean_invwishart, mc_mean_wishart, rwishart_outer_oracle,
};

pub const DEFAULT_SEED: u64 = 42;
pub const ALPHA: f64 = 0.001;
pub const KS_SAMPLES: usize = 50_000;
pub const MOMENT_SAMPLES: usize = 200_000;
pub const WISHART_MEAN_TOLERANCE: f64 = 0.02;
pub const INVWISHART_MEAN_TOLERANCE: f64 = 0.05;
pub const JACOBIAN_TOLERANCE: f64 = 1e-5;
pub const OFFSET_STDDEV_TOLERANCE: f64 = 1e-8;
pub const BENCH_DIM: usize = 200;

const STREAMS_PER_CHECK: u64 = 16;

/// One line of the NDJSON report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub check: String,
    pub params: Value,
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Gate {
    /// Smallest p-value must exceed the (corrected) level.
    PvalueAbove(f64),
    /// Error-type statistic must stay strictly below the threshold.
    Below(f64),
}

struct Outcome {
    statistic: f64,
    gate: Gate,
    params: Value,
}

struct Ctx {
    seed: u64,
    index: u64,
}

impl Ctx {
    fn stream(&self, k: u64) -> RngStream {
        RngStream::with_stream(self.seed, self.index * STREAMS_PER_CHECK + k)
    }
}

pub struct Check {
    pub name: &'static str,
    run: fn(&Ctx) -> Result<Outcome>,
}

pub const CHECKS: &[Check] = &[
    Check {
        name: "opcount.table",
        run: opcount_table,
    },
    Check {
        name: "bartlett.wishart_diagonal",
        run: wishart_diagonal,
    },
    Check {
        name: "bartlett.outer_oracle",
        run: outer_oracle,
    },
    Check {
        name: "bartlett.invwishart_diagonal",
        run: invwishart_diagonal,
    },
    Check {
        name: "equivalence.indirect_vs_direct",
        run: indirect_vs_direct,
    },
    Check {
        name: "moments.wishart_mean",
        run: wishart_mean,
    },
    Check {
        name: "moments.invwishart_mean_indirect",
        run: invwishart_mean_indirect,
    },
    Check {
        name: "moments.invwishart_mean_direct",
        run: invwishart_mean_direct,
    },
    Check {
        name: "jacobians.chol",
        run: jacobian_chol,
    },
    Check {
        name: "jacobians.tri_inverse",
        run: jacobian_tri_inverse,
    },
    Check {
        name: "densities.wishart_pair",
        run: density_wishart_pair,
    },
    Check {
        name: "densities.invwishart_pair",
        run: density_invwishart_pair,
    },
    Check {
        name: "densities.proof_chain",
        run: density_proof_chain,
    },
    Check {
        name: "reductions.wishart_m1",
        run: reduction_wishart,
    },
    Check {
        name: "reductions.invwishart_m1_indirect",
        run: reduction_invwishart_indirect,
    },
    Check {
        name: "reductions.invwishart_m1_direct",
        run: reduction_invwishart_direct,
    },
    Check {
        name: "errors.dof_rejected",
        run: error_dof,
    },
    Check {
        name: "errors.non_spd_scale",
        run: error_non_spd,
    },
    Check {
        name: "errors.mean_undefined",
        run: error_mean_undefined,
    },
    Check {
        name: "performance.precision_factor",
        run: performance_precision_factor,
    },
    Check {
        name: "performance.covariance",
        run: performance_covariance,
    },
];

/// A filter selects a check if it equals the full name or the group before
/// the dot (`jacobians` selects both Jacobian checks).
pub fn matches_filter(name: &str, filter: &str) -> bool {
    name == filter || name.split('.').next() == Some(filter)
}

pub fn select(only: &[String]) -> Vec<(usize, &'static Check)> {
    CHECKS
        .iter()
        .enumerate()
        .filter(|(_, c)| only.is_empty() || only.iter().any(|f| matches_filter(c.name, f)))
        .collect()
}

/// Runs one check by name with the given base seed.
pub fn run_check(name: &str, seed: u64) -> Result<CheckRecord> {
    let (index, check) = CHECKS
        .iter()
        .enumerate()
        .find(|(_, c)| c.name == name)
        .ok_or_else(|| Error::InvalidParameter(format!("unknown check {name:?}")))?;
    Ok(execute(index, check, seed))
}

/// Runs the selected checks on `jobs` threads; records come back in suite
/// order regardless of scheduling. Timing checks always run alone, after
/// the pool has drained.
pub fn run_suite(seed: u64, only: &[String], jobs: usize) -> Result<Vec<CheckRecord>> {
    let selected = select(only);
    if selected.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "no check matches {only:?}"
        )));
    }
    if jobs <= 1 {
        return Ok(selected
            .into_iter()
            .map(|(i, c)| execute(i, c, seed))
            .collect());
    }
    let (timed, pooled): (Vec<_>, Vec<_>) = selected
        .into_iter()
        .partition(|(_, c)| matches_filter(c.name, "performance"));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut records: Vec<(usize, CheckRecord)> = pool.install(|| {
        pooled
            .into_par_iter()
            .map(|(i, c)| (i, execute(i, c, seed)))
            .collect()
    });
    records.extend(timed.into_iter().map(|(i, c)| (i, execute(i, c, seed))));
    records.sort_by_key(|(i, _)| *i);
    Ok(records.into_iter().map(|(_, r)| r).collect())
}

fn execute(index: usize, check: &Check, seed: u64) -> CheckRecord {
    let ctx = Ctx {
        seed,
        index: index as u64,
    };
    match (check.run)(&ctx) {
        Ok(o) => {
            let (threshold, pass) = match o.gate {
                Gate::PvalueAbove(t) => (t, o.statistic > t),
                Gate::Below(t) => (t, o.statistic < t),
            };
            CheckRecord {
                check: check.name.into(),
                params: o.params,
                statistic: o.statistic,
                threshold,
                pass,
                seed,
            }
        }
        Err(e) => CheckRecord {
            check: check.name.into(),
            params: json!({ "error": e.to_string() }),
            statistic: f64::NAN,
            threshold: f64::NAN,
            pass: false,
            seed,
        },
    }
}

fn sq(rows: &[&[f64]]) -> SquareMatrix {
    SquareMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
        .expect("fixed test matrix")
}

pub fn sigma2() -> SquareMatrix {
    sq(&[&[2.0, 0.6], &[0.6, 1.0]])
}

pub fn sigma3() -> SquareMatrix {
    sq(&[&[1.0, 0.3, 0.1], &[0.3, 2.0, -0.4], &[0.1, -0.4, 0.7]])
}

pub fn sigma4() -> SquareMatrix {
    sq(&[
        &[2.0, 0.5, 0.3, 0.1],
        &[0.5, 1.5, 0.2, 0.0],
        &[0.3, 0.2, 1.0, -0.2],
        &[0.1, 0.0, -0.2, 0.8],
    ])
}

fn factor(x: &SquareMatrix) -> Result<CholeskyFactor> {
    chol_upper(x, &mut OpCounter::new())
}

/// `Omega = Sigma^{-1}` as a dense matrix.
pub fn precision_of(sigma: &SquareMatrix) -> Result<SquareMatrix> {
    let mut c = OpCounter::new();
    let u_omega = cholesky_upper_param(&ScaleParam::covariance(sigma.clone()), true, &mut c)?;
    Ok(gram_ut(&u_omega, &mut c))
}

fn entry_series(draws: &[SquareMatrix], i: usize, j: usize) -> Vec<f64> {
    draws.iter().map(|d| d[(i, j)]).collect()
}

fn upper_pairs(m: usize) -> Vec<(usize, usize)> {
    (0..m).flat_map(|i| (i..m).map(move |j| (i, j))).collect()
}

fn stddev(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

fn opcount_table(ctx: &Ctx) -> Result<Outcome> {
    let rows = opcount::run_table(4, ctx.seed)?;
    let mismatches = rows.iter().filter(|r| !r.matches()).count();
    Ok(Outcome {
        statistic: mismatches as f64,
        gate: Gate::Below(0.5),
        params: json!({ "m": 4, "cells": rows.len(), "verdict": opcount::verdict(&rows) }),
    })
}

/// `z_jj^2` against chi-square with `dof(j)` for 0-based `j`.
fn diagonal_laws<F, D>(ctx: &Ctx, draw: F, dof: D, label: &str) -> Result<Outcome>
where
    F: Fn(&mut RngStream, usize, f64) -> Result<UpperTriangular>,
    D: Fn(usize, f64, usize) -> f64,
{
    let (m, n) = (5, 10.0);
    let mut rng = ctx.stream(0);
    let mut diag = vec![Vec::with_capacity(KS_SAMPLES); m];
    for _ in 0..KS_SAMPLES {
        let z = draw(&mut rng, m, n)?;
        for (j, d) in z.diagonal().enumerate() {
            diag[j].push(d * d);
        }
    }
    let mut pvalues = Vec::with_capacity(m);
    for (j, xs) in diag.iter().enumerate() {
        let k = DegreesOfFreedom::new(dof(j, n, m))?;
        pvalues.push(ks_one_sample(xs, |x| chi_square_cdf(x, k).unwrap_or(f64::NAN))?.pvalue);
    }
    Ok(Outcome {
        statistic: pvalues.iter().copied().fold(f64::INFINITY, f64::min),
        gate: Gate::PvalueAbove(ALPHA / m as f64),
        params: json!({ "m": m, "n": n, "samples": KS_SAMPLES, "diagonal_law": label, "pvalues": pvalues }),
    })
}

fn wishart_diagonal(ctx: &Ctx) -> Result<Outcome> {
    diagonal_laws(
        ctx,
        |rng, m, n| Ok(draw_bartlett_wishart(rng, m, n)?.into_upper()),
        |j, n, _| n - j as f64,
        "chi2(n+1-j)",
    )
}

fn invwishart_diagonal(ctx: &Ctx) -> Result<Outcome> {
    diagonal_laws(
        ctx,
        |rng, m, n| Ok(draw_bartlett_invwishart(rng, m, n)?.into_upper()),
        |j, n, m| n - m as f64 + j as f64 + 1.0,
        "chi2(n-m+j)",
    )
}

fn outer_oracle(ctx: &Ctx) -> Result<Outcome> {
    let (m, n) = (2, 5.0);
    let sigma = sigma2();
    let u_sigma = factor(&sigma)?;
    let spec = SamplerSpec::new(m, n, ScaleParam::covariance(sigma), false)?;
    let mut a = ctx.stream(0);
    let mut b = ctx.stream(1);
    let bartlett = (0..KS_SAMPLES)
        .map(|_| Ok(rwishart(&mut a, &spec, &mut OpCounter::new())?.into_matrix()))
        .collect::<Result<Vec<_>>>()?;
    let oracle = (0..KS_SAMPLES)
        .map(|_| rwishart_outer_oracle(&mut b, m, n, &u_sigma))
        .collect::<Result<Vec<_>>>()?;
    per_entry_two_sample(
        &bartlett,
        &oracle,
        m,
        json!({ "m": m, "n": n, "samples": KS_SAMPLES }),
    )
}

fn per_entry_two_sample(
    x: &[SquareMatrix],
    y: &[SquareMatrix],
    m: usize,
    mut params: Value,
) -> Result<Outcome> {
    let pairs = upper_pairs(m);
    let pvalues = pairs
        .iter()
        .map(|&(i, j)| Ok(ks_two_sample(&entry_series(x, i, j), &entry_series(y, i, j))?.pvalue))
        .collect::<Result<Vec<_>>>()?;
    params["pvalues"] = json!(pvalues);
    Ok(Outcome {
        statistic: pvalues.iter().copied().fold(f64::INFINITY, f64::min),
        gate: Gate::PvalueAbove(ALPHA / pairs.len() as f64),
        params,
    })
}

fn indirect_vs_direct(ctx: &Ctx) -> Result<Outcome> {
    let (m, n) = (3, 8.0);
    let sigma = sigma3();
    let omega = precision_of(&sigma)?;
    let ind = SamplerSpec::new(m, n, ScaleParam::covariance(sigma), false)?;
    let dir = SamplerSpec::new(m, n, ScaleParam::precision(omega), false)?;
    let mut a = ctx.stream(0);
    let mut b = ctx.stream(1);
    let draws = |rng: &mut RngStream, spec: &SamplerSpec, alg| {
        (0..KS_SAMPLES)
            .map(|_| Ok(rinvwishart(rng, spec, alg, &mut OpCounter::new())?.into_matrix()))
            .collect::<Result<Vec<_>>>()
    };
    let x = draws(&mut a, &ind, Algorithm::Indirect)?;
    let y = draws(&mut b, &dir, Algorithm::Direct)?;
    per_entry_two_sample(
        &x,
        &y,
        m,
        json!({ "m": m, "n": n, "samples": KS_SAMPLES, "indirect": "Sigma", "direct": "Omega" }),
    )
}

fn wishart_mean(ctx: &Ctx) -> Result<Outcome> {
    let (m, n) = (4, 10.0);
    let spec = SamplerSpec::new(m, n, ScaleParam::covariance(sigma4()), false)?;
    let r = mc_mean_wishart(&mut ctx.stream(0), &spec, MOMENT_SAMPLES)?;
    Ok(Outcome {
        statistic: r.relative_error,
        gate: Gate::Below(WISHART_MEAN_TOLERANCE),
        params: json!({ "m": m, "n": n, "samples": MOMENT_SAMPLES, "target": "n*Sigma" }),
    })
}

fn invwishart_mean(ctx: &Ctx, algorithm: Algorithm) -> Result<Outcome> {
    let (m, n) = (4, 10.0);
    let sigma = sigma4();
    let scale = match algorithm {
        Algorithm::Indirect => ScaleParam::covariance(sigma),
        Algorithm::Direct => ScaleParam::precision(precision_of(&sigma)?),
    };
    let spec = SamplerSpec::new(m, n, scale, false)?;
    let r = mc_mean_invwishart(&mut ctx.stream(0), &spec, algorithm, MOMENT_SAMPLES)?;
    Ok(Outcome {
        statistic: r.relative_error,
        gate: Gate::Below(INVWISHART_MEAN_TOLERANCE),
        params: json!({
            "m": m, "n": n, "samples": MOMENT_SAMPLES,
            "algorithm": algorithm, "target": "Omega/(n-m-1)",
        }),
    })
}

fn invwishart_mean_indirect(ctx: &Ctx) -> Result<Outcome> {
    invwishart_mean(ctx, Algorithm::Indirect)
}

fn invwishart_mean_direct(ctx: &Ctx) -> Result<Outcome> {
    invwishart_mean(ctx, Algorithm::Direct)
}

/// Random well-conditioned upper triangular matrix: diagonal magnitudes in
/// [0.5, 2], off-diagonals N(0, 0.25).
pub fn random_upper(
    rng: &mut RngStream,
    m: usize,
    allow_negative_diagonal: bool,
) -> UpperTriangular {
    let mut data = vec![0.0; m * m];
    for i in 0..m {
        let mag = 0.5 + 1.5 * rng.uniform();
        let sign = if allow_negative_diagonal && rng.uniform() < 0.5 {
            -1.0
        } else {
            1.0
        };
        data[i * m + i] = sign * mag;
        for j in (i + 1)..m {
            data[i * m + j] = 0.5 * draw_std_normal(rng);
        }
    }
    UpperTriangular::from_raw(m, data)
}

fn relative_gap(fd: f64, exact: f64) -> f64 {
    (fd - exact).abs() / exact.abs().max(1.0)
}

fn jacobian_check<F>(ctx: &Ctx, negative_diagonal: bool, compare: F) -> Result<Outcome>
where
    F: Fn(&UpperTriangular) -> Result<(f64, f64)>,
{
    let mut rng = ctx.stream(0);
    let mut worst = 0.0f64;
    let mut points = 0;
    for m in 1..=3 {
        for _ in 0..10 {
            let at = random_upper(&mut rng, m, negative_diagonal);
            let (fd, exact) = compare(&at)?;
            worst = worst.max(relative_gap(fd, exact));
            points += 1;
        }
    }
    Ok(Outcome {
        statistic: worst,
        gate: Gate::Below(JACOBIAN_TOLERANCE),
        params: json!({ "dims": [1, 2, 3], "points": points, "error": "|fd-exact|/max(1,|exact|)" }),
    })
}

fn jacobian_chol(ctx: &Ctx) -> Result<Outcome> {
    jacobian_check(ctx, false, |t| {
        let fd = fd_logdet_jacobian(|x| Ok(gram_ut(x, &mut OpCounter::new()).into_vec()), t)?;
        Ok((fd, logjac_chol(&CholeskyFactor::new(t.clone())?)))
    })
}

fn jacobian_tri_inverse(ctx: &Ctx) -> Result<Outcome> {
    jacobian_check(ctx, true, |r| {
        let fd = fd_logdet_jacobian(
            |x| Ok(tri_inverse(x, &mut OpCounter::new())?.as_slice().to_vec()),
            r,
        )?;
        Ok((fd, logjac_tri_inverse(r)?))
    })
}

const DENSITY_DRAWS: usize = 100;

fn offset_outcome(offsets: &[f64], params: Value) -> Outcome {
    Outcome {
        statistic: stddev(offsets),
        gate: Gate::Below(OFFSET_STDDEV_TOLERANCE),
        params,
    }
}

fn density_wishart_pair(ctx: &Ctx) -> Result<Outcome> {
    let (m, n) = (4, 10.0);
    let u_sigma = factor(&sigma4())?;
    let mut rng = ctx.stream(0);
    let offsets = (0..DENSITY_DRAWS)
        .map(|_| {
            let mut c = OpCounter::new();
            let u = rwishart_chol(&mut rng, m, n, &u_sigma, &mut c)?;
            let a = gram_ut(&u, &mut c);
            Ok(logkernel_cholwishart(&u, n, &u_sigma)?
                - logkernel_wishart(&a, n, &u_sigma)?
                - logjac_chol(&u))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(offset_outcome(
        &offsets,
        json!({ "m": m, "n": n, "draws": DENSITY_DRAWS }),
    ))
}

fn density_invwishart_pair(ctx: &Ctx) -> Result<Outcome> {
    let (m, n) = (4, 10.0);
    let u_omega = factor(&precision_of(&sigma4())?)?;
    let mut rng = ctx.stream(0);
    let offsets = (0..DENSITY_DRAWS)
        .map(|_| {
            let mut c = OpCounter::new();
            let u = rinvwishart_chol(&mut rng, m, n, &u_omega, &mut c)?;
            let b = gram_ut(&u, &mut c);
            Ok(logkernel_cholinvwishart(&u, n, &u_omega)?
                - logkernel_invwishart(&b, n, &u_omega)?
                - logjac_chol(&u))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(offset_outcome(
        &offsets,
        json!({ "m": m, "n": n, "draws": DENSITY_DRAWS }),
    ))
}

/// For `U_B = Z^{-1} U_Omega`, the pulled-back density of `Z` must equal the
/// product of chi and normal kernels up to a constant.
fn density_proof_chain(ctx: &Ctx) -> Result<Outcome> {
    let (m, n) = (4, 7.5);
    let u_omega = factor(&precision_of(&sigma4())?)?;
    let mut rng = ctx.stream(0);
    let offsets = (0..DENSITY_DRAWS)
        .map(|_| {
            let z = draw_bartlett_invwishart(&mut rng, m, n)?;
            let u_b = invwishart_factor_from(&z, &u_omega, &mut OpCounter::new())?;
            let z = z.as_upper();
            let pulled_back = logkernel_cholinvwishart(&u_b, n, &u_omega)? + logjac_tri_inverse(z)?;
            let mut product = 0.0;
            for j in 0..m {
                let k = n - m as f64 + (j + 1) as f64;
                let d = z[(j, j)];
                product += (k - 1.0) * d.ln() - 0.5 * d * d;
                for i in 0..j {
                    product -= 0.5 * z[(i, j)] * z[(i, j)];
                }
            }
            Ok(pulled_back - product)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(offset_outcome(
        &offsets,
        json!({ "m": m, "n": n, "draws": DENSITY_DRAWS }),
    ))
}

fn scalar_draws(
    rng: &mut RngStream,
    spec: &SamplerSpec,
    algorithm: Option<Algorithm>,
) -> Result<Vec<f64>> {
    (0..KS_SAMPLES)
        .map(|_| {
            let mut c = OpCounter::new();
            let s = match algorithm {
                None => rwishart(rng, spec, &mut c)?,
                Some(alg) => rinvwishart(rng, spec, alg, &mut c)?,
            };
            Ok(s.into_matrix()[(0, 0)])
        })
        .collect()
}

fn reduction_wishart(ctx: &Ctx) -> Result<Outcome> {
    // A ~ gamma(n / 2, 2 sigma^2)
    let (n, sigma_sq) = (4.0, 1.5);
    let spec = SamplerSpec::new(1, n, ScaleParam::covariance(sq(&[&[sigma_sq]])), false)?;
    let xs = scalar_draws(&mut ctx.stream(0), &spec, None)?;
    let (shape, scale) = (n / 2.0, 2.0 * sigma_sq);
    let ks = ks_one_sample(&xs, |x| gamma_cdf(x, shape, scale).unwrap_or(f64::NAN))?;
    Ok(Outcome {
        statistic: ks.pvalue,
        gate: Gate::PvalueAbove(ALPHA),
        params: json!({ "n": n, "sigma": sigma_sq, "law": format!("gamma({shape}, {scale})"), "D": ks.statistic }),
    })
}

fn reduction_invwishart(ctx: &Ctx, algorithm: Algorithm) -> Result<Outcome> {
    // B ~ inverse-gamma(n / 2, omega / 2) with omega = 1 / sigma
    let (n, sigma_sq) = (6.0, 2.0);
    let scale = match algorithm {
        Algorithm::Indirect => ScaleParam::covariance(sq(&[&[sigma_sq]])),
        Algorithm::Direct => ScaleParam::precision(sq(&[&[1.0 / sigma_sq]])),
    };
    let spec = SamplerSpec::new(1, n, scale, false)?;
    let xs = scalar_draws(&mut ctx.stream(0), &spec, Some(algorithm))?;
    let (shape, ig_scale) = (n / 2.0, 0.5 / sigma_sq);
    let ks = ks_one_sample(&xs, |x| {
        inverse_gamma_cdf(x, shape, ig_scale).unwrap_or(f64::NAN)
    })?;
    Ok(Outcome {
        statistic: ks.pvalue,
        gate: Gate::PvalueAbove(ALPHA),
        params: json!({
            "n": n, "sigma": sigma_sq, "algorithm": algorithm,
            "law": format!("inverse-gamma({shape}, {ig_scale})"), "D": ks.statistic,
        }),
    })
}

fn reduction_invwishart_indirect(ctx: &Ctx) -> Result<Outcome> {
    reduction_invwishart(ctx, Algorithm::Indirect)
}

fn reduction_invwishart_direct(ctx: &Ctx) -> Result<Outcome> {
    reduction_invwishart(ctx, Algorithm::Direct)
}

fn boolean(ok: bool, params: Value) -> Outcome {
    Outcome {
        statistic: if ok { 0.0 } else { 1.0 },
        gate: Gate::Below(0.5),
        params,
    }
}

fn error_dof(_: &Ctx) -> Result<Outcome> {
    let scale = ScaleParam::covariance(SquareMatrix::identity(3));
    let rejected = matches!(
        SamplerSpec::new(3, 2.0, scale, false),
        Err(Error::InvalidDegreesOfFreedom { .. })
    );
    Ok(boolean(rejected, json!({ "m": 3, "n": 2.0 })))
}

fn error_non_spd(ctx: &Ctx) -> Result<Outcome> {
    let spec = SamplerSpec::new(
        2,
        4.0,
        ScaleParam::covariance(sq(&[&[1.0, 2.0], &[2.0, 1.0]])),
        false,
    )?;
    let err = rinvwishart(
        &mut ctx.stream(0),
        &spec,
        Algorithm::Indirect,
        &mut OpCounter::new(),
    );
    let ok = matches!(err, Err(ref e) if e.is_numerical());
    Ok(boolean(ok, json!({ "scale": [[1.0, 2.0], [2.0, 1.0]] })))
}

fn error_mean_undefined(ctx: &Ctx) -> Result<Outcome> {
    let spec = SamplerSpec::new(
        3,
        4.0,
        ScaleParam::precision(SquareMatrix::identity(3)),
        false,
    )?;
    let r = mc_mean_invwishart(&mut ctx.stream(0), &spec, Algorithm::Direct, 1000);
    Ok(boolean(
        matches!(r, Err(Error::MeanUndefined { .. })),
        json!({ "m": 3, "n": 4.0 }),
    ))
}

fn performance(
    ctx: &Ctx,
    param: Parameterization,
    retcholu: bool,
    expect: Algorithm,
) -> Result<Outcome> {
    let rows = bench::run(&BenchConfig {
        dims: vec![BENCH_DIM],
        param,
        retcholu,
        repetitions: bench::MIN_REPETITIONS,
        seed: ctx.seed,
    })?;
    let r = &rows[0];
    let (fast, slow) = match expect {
        Algorithm::Direct => (r.direct_median_ns, r.indirect_median_ns),
        Algorithm::Indirect => (r.indirect_median_ns, r.direct_median_ns),
    };
    Ok(Outcome {
        statistic: fast as f64 / slow as f64,
        gate: Gate::Below(1.0),
        params: json!({
            "m": BENCH_DIM, "param": param.symbol(), "retcholu": retcholu,
            "expected_faster": expect, "indirect_median_ns": r.indirect_median_ns as u64,
            "direct_median_ns": r.direct_median_ns as u64,
        }),
    })
}

fn performance_precision_factor(ctx: &Ctx) -> Result<Outcome> {
    performance(
        ctx,
        Parameterization::PrecisionFactor,
        true,
        Algorithm::Direct,
    )
}

fn performance_covariance(ctx: &Ctx) -> Result<Outcome> {
    performance(
        ctx,
        Parameterization::Covariance,
        false,
        Algorithm::Indirect,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn filters() {
        let names: Vec<_> = select(&["jacobians".into()])
            .iter()
            .map(|(_, c)| c.name)
            .collect();
        assert_eq!(names, vec!["jacobians.chol", "jacobians.tri_inverse"]);
        assert_eq!(select(&["densities.proof_chain".into()]).len(), 1);
        assert_eq!(select(&[]).len(), CHECKS.len());
        assert!(select(&["jacob".into()]).is_empty());
        assert!(run_suite(1, &["nope".into()], 1).is_err());
    }

    #[test]
    fn unique_names() {
        let mut names: Vec<_> = CHECKS.iter().map(|c| c.name).collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), CHECKS.len());
    }

    #[test]
    fn cheap_checks_pass() {
        for name in [
            "opcount.table",
            "jacobians.chol",
            "jacobians.tri_inverse",
            "densities.wishart_pair",
            "densities.invwishart_pair",
            "densities.proof_chain",
            "errors.dof_rejected",
            "errors.non_spd_scale",
            "errors.mean_undefined",
        ] {
            let r = run_check(name, DEFAULT_SEED).unwrap();
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn parallel_run_matches_serial() {
        let only = vec!["jacobians".to_string(), "densities".to_string()];
        let a = run_suite(5, &only, 1).unwrap();
        let b = run_suite(5, &only, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn precision_roundtrip() {
        let s = sigma3();
        let omega = precision_of(&s).unwrap();
        let back = precision_of(&omega).unwrap();
        for (a, b) in back.as_slice().iter().zip(s.as_slice()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
