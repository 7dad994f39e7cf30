//! Wall-clock comparison of the indirect and direct inverse-Wishart samplers.

use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::OpCounter;
use crate::opcount::{ar1_covariance, expected_counts, scale_in};
use crate::random::RngStream;
use crate::samplers::{rinvwishart, Algorithm, Parameterization, SamplerSpec};

pub const MIN_REPETITIONS: usize = 25;
pub const WARMUP_DRAWS: usize = 5;

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub dims: Vec<usize>,
    pub param: Parameterization,
    pub retcholu: bool,
    pub repetitions: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub m: usize,
    pub param: Parameterization,
    pub retcholu: bool,
    pub indirect_median_ns: u128,
    pub direct_median_ns: u128,
    pub indirect_ops: OpCounter,
    pub direct_ops: OpCounter,
    /// Total counted kernels of direct over indirect.
    pub op_ratio: f64,
}

impl BenchRow {
    pub fn faster(&self) -> Algorithm {
        if self.direct_median_ns < self.indirect_median_ns {
            Algorithm::Direct
        } else {
            Algorithm::Indirect
        }
    }
}

fn median(mut xs: Vec<u128>) -> u128 {
    xs.sort_unstable();
    let k = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[k]
    } else {
        (xs[k - 1] + xs[k]) / 2
    }
}

/// Median per-draw time of each algorithm at each dimension. The two
/// algorithms alternate draw by draw so drift in machine load hits both.
pub fn run(config: &BenchConfig) -> Result<Vec<BenchRow>> {
    if config.repetitions < MIN_REPETITIONS {
        return Err(Error::InvalidParameter(format!(
            "need at least {MIN_REPETITIONS} repetitions, got {}",
            config.repetitions
        )));
    }
    if config.dims.is_empty() || config.dims.contains(&0) {
        return Err(Error::InvalidParameter(
            "dimensions must be positive".into(),
        ));
    }
    let mut rows = Vec::with_capacity(config.dims.len());
    for &m in &config.dims {
        let scale = scale_in(config.param, &ar1_covariance(m, 0.5))?;
        let spec = SamplerSpec::new(m, m as f64 + 2.0, scale, config.retcholu)?;
        let mut rng = RngStream::new(config.seed);
        let algs = [Algorithm::Indirect, Algorithm::Direct];
        for _ in 0..WARMUP_DRAWS {
            for alg in algs {
                rinvwishart(&mut rng, &spec, alg, &mut OpCounter::new())?;
            }
        }
        let mut times = [Vec::new(), Vec::new()];
        let mut ops = [OpCounter::new(); 2];
        for _ in 0..config.repetitions {
            for (k, alg) in algs.into_iter().enumerate() {
                let mut counter = OpCounter::new();
                let start = Instant::now();
                let draw = rinvwishart(&mut rng, &spec, alg, &mut counter)?;
                times[k].push(start.elapsed().as_nanos());
                std::hint::black_box(draw);
                ops[k] = counter;
            }
        }
        let [ti, td] = times;
        rows.push(BenchRow {
            m,
            param: config.param,
            retcholu: config.retcholu,
            indirect_median_ns: median(ti),
            direct_median_ns: median(td),
            indirect_ops: ops[0],
            direct_ops: ops[1],
            op_ratio: ops[1].total() as f64 / ops[0].total() as f64,
        });
    }
    Ok(rows)
}

pub fn render(rows: &[BenchRow]) -> String {
    let mut out = String::from(
        "m     param    retcholU  indirect_ms  direct_ms  faster    ops(ind) trtri/trmm/potrf  ops(dir)  ratio\n",
    );
    for r in rows {
        let fmt_ops = |o: OpCounter| format!("{}/{}/{}", o.trtri, o.trmm, o.potrf);
        out.push_str(&format!(
            "{:<5} {:<8} {:<9} {:>11.3} {:>10.3}  {:<8}  {:<25} {:<9} {:.3}\n",
            r.m,
            r.param.symbol(),
            r.retcholu,
            r.indirect_median_ns as f64 / 1e6,
            r.direct_median_ns as f64 / 1e6,
            r.faster().name(),
            fmt_ops(r.indirect_ops),
            fmt_ops(r.direct_ops),
            r.op_ratio,
        ));
    }
    if let Some(r) = rows.first() {
        for alg in [Algorithm::Indirect, Algorithm::Direct] {
            let e = expected_counts(r.param, alg, r.retcholu);
            out.push_str(&format!(
                "expected {} ({}, retcholU={}): TRTRI {} TRMM {} POTRF {}\n",
                alg,
                r.param.symbol(),
                r.retcholu,
                e.trtri,
                e.trmm,
                e.potrf
            ));
        }
    }
    out
}
