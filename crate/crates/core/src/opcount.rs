//! Kernel-count table for both inverse-Wishart algorithms under every
//! parameterization, checked against the expected counts.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::Result;
use crate::linalg::{gram_ut, OpCounter, SquareMatrix};
use crate::random::RngStream;
use crate::samplers::{
    cholesky_upper_param, rinvwishart, Algorithm, Parameterization, SamplerSpec, ScaleParam,
};

/// Expected `(trtri, trmm, potrf)` counts; the second triple is for
/// `retcholu = true`.
pub fn expected_counts(param: Parameterization, algorithm: Algorithm, retcholu: bool) -> OpCounter {
    use Algorithm::*;
    use Parameterization::*;
    let (matrix, factor) = match (algorithm, param) {
        (Indirect, Covariance) => ((1, 2, 1), (1, 2, 2)),
        (Indirect, CovarianceFactor) => ((1, 2, 0), (1, 2, 1)),
        (Indirect, Precision) => ((2, 3, 2), (2, 3, 3)),
        (Indirect, PrecisionFactor) => ((2, 3, 1), (2, 3, 2)),
        (Direct, Covariance) => ((2, 3, 2), (2, 2, 2)),
        (Direct, CovarianceFactor) => ((2, 3, 1), (2, 2, 1)),
        (Direct, Precision) => ((1, 2, 1), (1, 1, 1)),
        (Direct, PrecisionFactor) => ((1, 2, 0), (1, 1, 0)),
    };
    let (trtri, trmm, potrf) = if retcholu { factor } else { matrix };
    OpCounter { trtri, trmm, potrf }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OpcountRow {
    pub param: Parameterization,
    pub algorithm: Algorithm,
    pub retcholu: bool,
    pub observed: OpCounter,
    pub expected: OpCounter,
}

impl OpcountRow {
    pub fn matches(&self) -> bool {
        self.observed == self.expected
    }
}

/// Test scale: an AR(1) correlation matrix `rho^|i-j|`, well conditioned for
/// `|rho| < 1`.
pub fn ar1_covariance(m: usize, rho: f64) -> SquareMatrix {
    let data = (0..m * m)
        .map(|k| rho.powi((k / m).abs_diff(k % m) as i32))
        .collect();
    SquareMatrix::from_raw(m, data)
}

/// The scale matrix `sigma` expressed in each of the four parameterizations.
pub fn scale_in(param: Parameterization, sigma: &SquareMatrix) -> Result<ScaleParam> {
    let mut scratch = OpCounter::new();
    let cov = ScaleParam::covariance(sigma.clone());
    Ok(match param {
        Parameterization::Covariance => cov,
        Parameterization::CovarianceFactor => {
            ScaleParam::covariance_factor(cholesky_upper_param(&cov, false, &mut scratch)?)
        }
        Parameterization::Precision => {
            let u_omega = cholesky_upper_param(&cov, true, &mut scratch)?;
            ScaleParam::precision(gram_ut(&u_omega, &mut scratch))
        }
        Parameterization::PrecisionFactor => {
            ScaleParam::precision_factor(cholesky_upper_param(&cov, true, &mut scratch)?)
        }
    })
}

/// Runs one draw for each of the 16 combinations and records the counters.
pub fn run_table(m: usize, seed: u64) -> Result<Vec<OpcountRow>> {
    let sigma = ar1_covariance(m, 0.5);
    let mut rows = Vec::with_capacity(16);
    for param in Parameterization::ALL {
        let scale = scale_in(param, &sigma)?;
        for algorithm in [Algorithm::Indirect, Algorithm::Direct] {
            for retcholu in [false, true] {
                let spec = SamplerSpec::new(m, m as f64 + 2.0, scale.clone(), retcholu)?;
                let mut counter = OpCounter::new();
                rinvwishart(&mut RngStream::new(seed), &spec, algorithm, &mut counter)?;
                rows.push(OpcountRow {
                    param,
                    algorithm,
                    retcholu,
                    observed: counter,
                    expected: expected_counts(param, algorithm, retcholu),
                });
            }
        }
    }
    Ok(rows)
}

pub fn verdict(rows: &[OpcountRow]) -> String {
    let ok = rows.iter().filter(|r| r.matches()).count();
    let word = if ok == rows.len() {
        "MATCH"
    } else {
        "MISMATCH"
    };
    format!("{word} {ok}/{}", rows.len())
}

/// One line per combination followed by the verdict line.
pub fn render_rows(rows: &[OpcountRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<8} {:<9} {:<8} {:>5} {:>4} {:>5}  {:<8}  status",
        "param", "algorithm", "retcholU", "TRTRI", "TRMM", "POTRF", "expected"
    );
    for r in rows {
        let e = r.expected;
        let _ = writeln!(
            out,
            "{:<8} {:<9} {:<8} {:>5} {:>4} {:>5}  {:<8}  {}",
            r.param.symbol(),
            r.algorithm.name(),
            r.retcholu,
            r.observed.trtri,
            r.observed.trmm,
            r.observed.potrf,
            format!("{}/{}/{}", e.trtri, e.trmm, e.potrf),
            if r.matches() { "ok" } else { "MISMATCH" }
        );
    }
    let _ = writeln!(out, "{}", verdict(rows));
    out
}

fn cell(matrix: u64, factor: u64) -> String {
    if matrix == factor {
        matrix.to_string()
    } else {
        format!("{matrix}({factor})")
    }
}

/// Compact rendering in the `TRTRI | TRMM | POTRF` layout with the
/// factor-only count in parentheses where it differs.
pub fn render_compact(param: Parameterization, algorithm: Algorithm) -> String {
    let a = expected_counts(param, algorithm, false);
    let b = expected_counts(param, algorithm, true);
    format!(
        "{} | {} | {}",
        cell(a.trtri, b.trtri),
        cell(a.trmm, b.trmm),
        cell(a.potrf, b.potrf)
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_sixteen_cells_match() {
        for m in [1, 3, 8] {
            let rows = run_table(m, 7).unwrap();
            assert_eq!(rows.len(), 16);
            for r in &rows {
                assert!(r.matches(), "{r:?}");
            }
            assert_eq!(verdict(&rows), "MATCH 16/16");
        }
    }

    #[test]
    fn compact_cells() {
        use Algorithm::*;
        use Parameterization::*;
        assert_eq!(render_compact(Covariance, Indirect), "1 | 2 | 1(2)");
        assert_eq!(render_compact(CovarianceFactor, Indirect), "1 | 2 | 0(1)");
        assert_eq!(render_compact(Precision, Indirect), "2 | 3 | 2(3)");
        assert_eq!(render_compact(PrecisionFactor, Indirect), "2 | 3 | 1(2)");
        assert_eq!(render_compact(Covariance, Direct), "2 | 3(2) | 2");
        assert_eq!(render_compact(CovarianceFactor, Direct), "2 | 3(2) | 1");
        assert_eq!(render_compact(Precision, Direct), "1 | 2(1) | 1");
        assert_eq!(render_compact(PrecisionFactor, Direct), "1 | 2(1) | 0");
    }

    #[test]
    fn mismatch_is_reported() {
        let mut rows = run_table(2, 1).unwrap();
        rows[3].observed.trmm += 1;
        assert_eq!(verdict(&rows), "MISMATCH 15/16");
        assert!(render_rows(&rows).contains("MISMATCH"));
    }

    #[test]
    fn ar1_shape() {
        let s = ar1_covariance(3, 0.5);
        assert_eq!(
            s.as_slice(),
            &[1.0, 0.5, 0.25, 0.5, 1.0, 0.5, 0.25, 0.5, 1.0]
        );
    }
}
