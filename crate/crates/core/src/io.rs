//! Sample files: CSV matrix blocks or NDJSON records, both bit-exact.
//!
//! CSV layout:
//!
//! ```text
//! ## invwishart m=2 n=5 param=Sigma retcholU=false algorithm=indirect seed=42 nsamples=3 square=false
//! ## ops_per_draw trtri=1 trmm=2 potrf=1
//! # m=2 kind=square
//! 3.2,0.41
//! 0.41,1.9
//!
//! # m=2 kind=square
//! ...
//! ```
//!
//! Values are written with Rust's shortest round-trip formatting, so reading
//! a file back reproduces every `f64` exactly.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::linalg::{OpCounter, SquareMatrix};
use crate::samplers::{Algorithm, Parameterization, Sample};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MatrixKind {
    #[serde(rename = "square")]
    Square,
    #[serde(rename = "cholU")]
    CholU,
}

impl MatrixKind {
    pub fn name(self) -> &'static str {
        match self {
            MatrixKind::Square => "square",
            MatrixKind::CholU => "cholU",
        }
    }
}

impl FromStr for MatrixKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "square" => Ok(MatrixKind::Square),
            "cholU" => Ok(MatrixKind::CholU),
            other => Err(Error::InvalidParameter(format!(
                "unknown matrix kind {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Ndjson,
}

/// A matrix read back from a file, in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixRecord {
    pub kind: MatrixKind,
    pub m: usize,
    pub data: Vec<f64>,
}

impl MatrixRecord {
    pub fn from_sample(sample: &Sample) -> Self {
        let kind = if sample.is_factor() {
            MatrixKind::CholU
        } else {
            MatrixKind::Square
        };
        Self {
            kind,
            m: sample.dim(),
            data: sample.as_slice().to_vec(),
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.m.max(1))
    }

    pub fn to_square(&self) -> Result<SquareMatrix> {
        SquareMatrix::from_row_major(self.m, self.data.clone())
    }
}

/// Run metadata written ahead of the matrices.
#[derive(Debug, Clone, Serialize)]
pub struct RunHeader {
    pub m: usize,
    pub n: f64,
    pub param: Parameterization,
    pub retcholu: bool,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub nsamples: usize,
    pub square: bool,
    pub ops_per_draw: OpCounter,
}

impl fmt::Display for RunHeader {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "m={} n={:?} param={} retcholU={} algorithm={} seed={} nsamples={} square={}",
            self.m,
            self.n,
            self.param.symbol(),
            self.retcholu,
            self.algorithm,
            self.seed,
            self.nsamples,
            self.square
        )
    }
}

fn write_csv_block<W: Write + ?Sized>(w: &mut W, rec: &MatrixRecord) -> io::Result<()> {
    writeln!(w, "# m={} kind={}", rec.m, rec.kind.name())?;
    for row in rec.rows() {
        let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn write_samples<W: Write + ?Sized>(
    w: &mut W,
    format: Format,
    header: &RunHeader,
    records: &[MatrixRecord],
) -> io::Result<()> {
    match format {
        Format::Csv => {
            writeln!(w, "## invwishart {header}")?;
            writeln!(w, "## ops_per_draw {}", header.ops_per_draw)?;
            for (k, rec) in records.iter().enumerate() {
                if k > 0 {
                    writeln!(w)?;
                }
                write_csv_block(w, rec)?;
            }
        }
        Format::Ndjson => {
            writeln!(w, "{}", json!({ "type": "header", "run": header }))?;
            for (k, rec) in records.iter().enumerate() {
                let rows: Vec<&[f64]> = rec.rows().collect();
                let line = json!({ "type": "matrix", "index": k, "m": rec.m, "kind": rec.kind, "rows": rows });
                writeln!(w, "{line}")?;
            }
        }
    }
    Ok(())
}

fn bad(line: usize, what: impl fmt::Display) -> Error {
    Error::InvalidParameter(format!("line {line}: {what}"))
}

fn parse_row(line: usize, text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|e| bad(line, format!("{e}: {v:?}")))
        })
        .collect()
}

/// Parses a CSV or NDJSON sample file (detected from the first non-blank
/// character).
pub fn read_samples(text: &str) -> Result<Vec<MatrixRecord>> {
    match text.trim_start().chars().next() {
        None => Ok(Vec::new()),
        Some('{') => read_ndjson(text),
        Some(_) => read_csv(text),
    }
}

fn read_csv(text: &str) -> Result<Vec<MatrixRecord>> {
    let mut out = Vec::new();
    let mut current: Option<MatrixRecord> = None;
    let mut finish = |rec: Option<MatrixRecord>, line: usize| -> Result<()> {
        if let Some(rec) = rec {
            if rec.data.len() != rec.m * rec.m {
                return Err(bad(
                    line,
                    format!(
                        "block has {} values, expected {}",
                        rec.data.len(),
                        rec.m * rec.m
                    ),
                ));
            }
            out.push(rec);
        }
        Ok(())
    };
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with("##") {
            continue;
        }
        if let Some(rest) = t.strip_prefix('#') {
            finish(current.take(), line)?;
            let mut m = None;
            let mut kind = MatrixKind::Square;
            for field in rest.split_whitespace() {
                match field.split_once('=') {
                    Some(("m", v)) => m = Some(v.parse::<usize>().map_err(|e| bad(line, e))?),
                    Some(("kind", v)) => kind = v.parse()?,
                    _ => return Err(bad(line, format!("unexpected header field {field:?}"))),
                }
            }
            let m = m.ok_or_else(|| bad(line, "block header without m="))?;
            current = Some(MatrixRecord {
                kind,
                m,
                data: Vec::with_capacity(m * m),
            });
            continue;
        }
        let rec = current
            .as_mut()
            .ok_or_else(|| bad(line, "values before a block header"))?;
        let row = parse_row(line, t)?;
        if row.len() != rec.m {
            return Err(bad(
                line,
                format!("row has {} values, expected {}", row.len(), rec.m),
            ));
        }
        rec.data.extend(row);
    }
    finish(current.take(), text.lines().count())?;
    Ok(out)
}

fn read_ndjson(text: &str) -> Result<Vec<MatrixRecord>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let v: serde_json::Value = serde_json::from_str(raw).map_err(|e| bad(line, e))?;
        if v["type"] != "matrix" {
            continue;
        }
        let m = v["m"].as_u64().ok_or_else(|| bad(line, "missing m"))? as usize;
        let kind: MatrixKind = v["kind"]
            .as_str()
            .ok_or_else(|| bad(line, "missing kind"))?
            .parse()?;
        let rows = v["rows"]
            .as_array()
            .ok_or_else(|| bad(line, "missing rows"))?;
        let mut data = Vec::with_capacity(m * m);
        for r in rows {
            let r = r
                .as_array()
                .ok_or_else(|| bad(line, "row is not an array"))?;
            if r.len() != m {
                return Err(bad(
                    line,
                    format!("row has {} values, expected {m}", r.len()),
                ));
            }
            for x in r {
                data.push(x.as_f64().ok_or_else(|| bad(line, "non-numeric entry"))?);
            }
        }
        if data.len() != m * m {
            return Err(bad(
                line,
                format!("matrix has {} values, expected {}", data.len(), m * m),
            ));
        }
        out.push(MatrixRecord { kind, m, data });
    }
    Ok(out)
}

/// Reads a scale matrix: either one CSV block or bare comma-separated rows.
pub fn read_scale(text: &str) -> Result<SquareMatrix> {
    let has_header = text
        .lines()
        .any(|l| l.trim_start().starts_with('#') && !l.trim_start().starts_with("##"));
    if has_header || text.trim_start().starts_with('{') {
        let mut recs = read_samples(text)?;
        if recs.len() != 1 {
            return Err(Error::InvalidParameter(format!(
                "scale file holds {} matrices, expected 1",
                recs.len()
            )));
        }
        return recs.remove(0).to_square();
    }
    let rows = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with("##"))
        .map(|(i, l)| parse_row(i + 1, l.trim()))
        .collect::<Result<Vec<_>>>()?;
    SquareMatrix::from_rows(&rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header() -> RunHeader {
        RunHeader {
            m: 2,
            n: 5.0,
            param: Parameterization::Covariance,
            retcholu: false,
            algorithm: Algorithm::Indirect,
            seed: 42,
            nsamples: 2,
            square: false,
            ops_per_draw: OpCounter {
                trtri: 1,
                trmm: 2,
                potrf: 1,
            },
        }
    }

    fn awkward_records() -> Vec<MatrixRecord> {
        vec![
            MatrixRecord {
                kind: MatrixKind::Square,
                m: 2,
                data: vec![0.1 + 0.2, 1e-300, 1e-300, -7.25e17],
            },
            MatrixRecord {
                kind: MatrixKind::CholU,
                m: 2,
                data: vec![std::f64::consts::PI, 5e-324, 0.0, 1.0],
            },
        ]
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_samples(&mut buf, Format::Csv, &header(), &awkward_records()[..1]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "## invwishart m=2 n=5.0 param=Sigma retcholU=false algorithm=indirect seed=42 nsamples=2 square=false");
        assert_eq!(lines[1], "## ops_per_draw trtri=1 trmm=2 potrf=1");
        assert_eq!(lines[2], "# m=2 kind=square");
        assert_eq!(lines[3], "0.30000000000000004,1e-300");
    }

    #[test]
    fn round_trip_is_bit_exact() {
        for format in [Format::Csv, Format::Ndjson] {
            let recs = awkward_records();
            let mut buf = Vec::new();
            write_samples(&mut buf, format, &header(), &recs).unwrap();
            let back = read_samples(std::str::from_utf8(&buf).unwrap()).unwrap();
            assert_eq!(back.len(), recs.len());
            for (a, b) in back.iter().zip(&recs) {
                assert_eq!(a.kind, b.kind);
                let bits =
                    |r: &MatrixRecord| r.data.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
                assert_eq!(bits(a), bits(b), "{format:?}");
            }
        }
    }

    #[test]
    fn malformed_input() {
        assert!(read_samples("# m=2 kind=square\n1,2\n3\n").is_err());
        assert!(read_samples("1,2\n").is_err());
        assert!(read_samples("# m=2 kind=triangle\n").is_err());
        assert!(read_samples("# m=2\n1,2\n").is_err());
        assert!(read_samples("").unwrap().is_empty());
    }

    #[test]
    fn scale_files() {
        let bare = read_scale("2,0.5\n0.5,1\n").unwrap();
        assert_eq!(bare.as_slice(), &[2.0, 0.5, 0.5, 1.0]);
        let block = read_scale("# m=2 kind=square\n2,0.5\n0.5,1\n").unwrap();
        assert_eq!(block, bare);
        assert!(read_scale("1,2\n3\n").is_err());
    }
}
