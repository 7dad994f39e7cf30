//! `invwishart`: sample, evaluate, validate and benchmark from the shell.
//!
//! Exit codes: 0 success, 1 a check or table cell failed, 2 invalid
//! arguments or input, 3 I/O failure, 4 numerical failure (for example a
//! scale matrix that is not positive definite).

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use invwishart::bench::{self, BenchConfig};
use invwishart::io::{
    read_samples, read_scale, write_samples, Format, MatrixKind, MatrixRecord, RunHeader,
};
use invwishart::validation::suite::{self, DEFAULT_SEED};
use invwishart::{
    cholesky_upper_param, gram_ut, logkernel_cholinvwishart, logkernel_cholwishart,
    logkernel_invwishart, logkernel_wishart, opcount, recommend_algorithm, rinvwishart, Algorithm,
    CholeskyFactor, Error, OpCounter, Parameterization, RngStream, Sample, SamplerSpec, ScaleParam,
    SquareMatrix, UpperTriangular,
};

const EXIT_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;

#[derive(Parser)]
#[command(
    name = "invwishart",
    version,
    about = "Wishart and inverse-Wishart sampling with kernel counting"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw inverse-Wishart matrices (or their upper Cholesky factors) to a file.
    Sample(SampleArgs),
    /// Evaluate a log density kernel for every matrix in a sample file.
    Density(DensityArgs),
    /// Count TRTRI/TRMM/POTRF calls for all 16 sampler configurations.
    Opcount(OpcountArgs),
    /// Run the statistical and numerical validation suite.
    Validate(ValidateArgs),
    /// Time the indirect and direct samplers against each other.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgorithmChoice {
    Indirect,
    Direct,
    Auto,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatChoice {
    Csv,
    Ndjson,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum KernelKind {
    Wishart,
    Invwishart,
    Cholwishart,
    Cholinvwishart,
}

#[derive(Args)]
struct ScaleArgs {
    /// Scale matrix file (comma-separated rows or one `# m=` block); identity if omitted.
    #[arg(long)]
    scale: Option<PathBuf>,
    /// The scale is a covariance (`Sigma`) rather than a precision (`Omega`).
    #[arg(long, num_args = 0..=1, default_value_t = false, default_missing_value = "true")]
    iscov: bool,
    /// The scale file holds the upper Cholesky factor of the scale.
    #[arg(long, num_args = 0..=1, default_value_t = false, default_missing_value = "true")]
    ischolu: bool,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: f64,
    #[command(flatten)]
    scale: ScaleArgs,
    /// Return the upper Cholesky factor `U_B` instead of `B`.
    #[arg(long, num_args = 0..=1, default_value_t = false, default_missing_value = "true")]
    retcholu: bool,
    #[arg(long, value_enum, default_value = "auto")]
    algorithm: AlgorithmChoice,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    nsamples: usize,
    /// Output file; standard output if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatChoice,
    /// Write `U^T U` for every returned factor.
    #[arg(long)]
    square: bool,
}

#[derive(Args)]
struct DensityArgs {
    #[arg(long, value_enum)]
    kind: KernelKind,
    /// Sample file written by `sample`.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    n: f64,
    #[command(flatten)]
    scale: ScaleArgs,
}

#[derive(Args)]
struct OpcountArgs {
    #[arg(long, default_value_t = 4)]
    m: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Check group (`jacobians`) or full check name; repeatable or comma-separated.
    #[arg(long, value_delimiter = ',')]
    only: Vec<String>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// NDJSON report file; standard output if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Dimensions to time, comma-separated.
    #[arg(long, value_delimiter = ',', default_value = "200")]
    m: Vec<usize>,
    #[arg(long, num_args = 0..=1, default_value_t = false, default_missing_value = "true")]
    iscov: bool,
    #[arg(long, num_args = 0..=1, default_value_t = false, default_missing_value = "true")]
    ischolu: bool,
    #[arg(long, num_args = 0..=1, default_value_t = false, default_missing_value = "true")]
    retcholu: bool,
    #[arg(long, default_value_t = bench::MIN_REPETITIONS)]
    repetitions: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

enum Failure {
    Lib(Error),
    Io(PathBuf, io::Error),
    Checks(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type CmdResult = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sample(a) => cmd_sample(a),
        Command::Density(a) => cmd_density(a),
        Command::Opcount(a) => cmd_opcount(a),
        Command::Validate(a) => cmd_validate(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() {
                EXIT_NUMERICAL
            } else {
                EXIT_USAGE
            })
        }
        Err(Failure::Io(path, e)) => {
            eprintln!("error: {}: {e}", path.display());
            ExitCode::from(EXIT_IO)
        }
        Err(Failure::Checks(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(EXIT_FAILED)
        }
    }
}

fn read_text(path: &Path) -> std::result::Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(path.to_path_buf(), e))
}

fn load_scale(args: &ScaleArgs, m: Option<usize>) -> std::result::Result<ScaleParam, Failure> {
    let s = match &args.scale {
        Some(path) => read_scale(&read_text(path)?)?,
        None => SquareMatrix::identity(m.ok_or_else(|| {
            Error::InvalidParameter("--scale is required when the dimension is not known".into())
        })?),
    };
    if let Some(m) = m {
        if s.dim() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: s.dim(),
            }
            .into());
        }
    }
    Ok(ScaleParam::new(s, args.iscov, args.ischolu)?)
}

/// Writes through `f` to `out`, or to standard output.
fn emit<F>(out: Option<&Path>, f: F) -> CmdResult
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    let (result, path) = match out {
        Some(path) => {
            let file = fs::File::create(path).map_err(|e| Failure::Io(path.to_path_buf(), e))?;
            let mut w = BufWriter::new(file);
            (f(&mut w).and_then(|_| w.flush()), path.to_path_buf())
        }
        None => {
            let mut w = io::stdout().lock();
            (f(&mut w).and_then(|_| w.flush()), PathBuf::from("<stdout>"))
        }
    };
    result.map_err(|e| Failure::Io(path, e))
}

fn cmd_sample(a: SampleArgs) -> CmdResult {
    let scale = load_scale(&a.scale, Some(a.m))?;
    let spec = SamplerSpec::new(a.m, a.n, scale, a.retcholu)?;
    let algorithm = match a.algorithm {
        AlgorithmChoice::Indirect => Algorithm::Indirect,
        AlgorithmChoice::Direct => Algorithm::Direct,
        AlgorithmChoice::Auto => recommend_algorithm(spec.scale()),
    };
    let mut rng = RngStream::new(a.seed);
    let mut ops = OpCounter::new();
    let mut records = Vec::with_capacity(a.nsamples);
    for _ in 0..a.nsamples {
        ops = OpCounter::new();
        let mut draw = rinvwishart(&mut rng, &spec, algorithm, &mut ops)?;
        if a.square {
            if let Sample::Factor(u) = draw {
                draw = Sample::Matrix(gram_ut(&u, &mut OpCounter::new()));
            }
        }
        records.push(MatrixRecord::from_sample(&draw));
    }
    let header = RunHeader {
        m: a.m,
        n: a.n,
        param: spec.scale().parameterization(),
        retcholu: a.retcholu,
        algorithm,
        seed: a.seed,
        nsamples: a.nsamples,
        square: a.square,
        ops_per_draw: ops,
    };
    let format = match a.format {
        FormatChoice::Csv => Format::Csv,
        FormatChoice::Ndjson => Format::Ndjson,
    };
    emit(a.out.as_deref(), |w| {
        write_samples(w, format, &header, &records)
    })
}

fn cmd_density(a: DensityArgs) -> CmdResult {
    let records = read_samples(&read_text(&a.input)?)?;
    let m = records.first().map(|r| r.m);
    let scale = load_scale(&a.scale, m)?;
    let wishart = matches!(a.kind, KernelKind::Wishart | KernelKind::Cholwishart);
    let factor = matches!(a.kind, KernelKind::Cholwishart | KernelKind::Cholinvwishart);
    // Wishart kernels take U_Sigma, inverse-Wishart kernels U_Omega.
    let invert = if wishart {
        !scale.iscov()
    } else {
        scale.iscov()
    };
    let u_scale = cholesky_upper_param(&scale, invert, &mut OpCounter::new())?;
    let mut values = Vec::with_capacity(records.len());
    for rec in &records {
        let expected = if factor {
            MatrixKind::CholU
        } else {
            MatrixKind::Square
        };
        if rec.kind != expected {
            return Err(Error::InvalidParameter(format!(
                "kernel expects {} matrices, file holds {}",
                expected.name(),
                rec.kind.name()
            ))
            .into());
        }
        let v = if factor {
            let u = CholeskyFactor::new(UpperTriangular::from_row_major(rec.m, rec.data.clone())?)?;
            if wishart {
                logkernel_cholwishart(&u, a.n, &u_scale)?
            } else {
                logkernel_cholinvwishart(&u, a.n, &u_scale)?
            }
        } else {
            let x = rec.to_square()?;
            if wishart {
                logkernel_wishart(&x, a.n, &u_scale)?
            } else {
                logkernel_invwishart(&x, a.n, &u_scale)?
            }
        };
        values.push(v);
    }
    emit(None, |w| {
        values.iter().try_for_each(|v| writeln!(w, "{v:?}"))
    })
}

fn cmd_opcount(a: OpcountArgs) -> CmdResult {
    let rows = opcount::run_table(a.m, a.seed)?;
    emit(None, |w| {
        writeln!(w, "kernel counts per draw, m={} n={}", a.m, a.m + 2)?;
        write!(w, "{}", opcount::render_rows(&rows))?;
        writeln!(w)?;
        writeln!(w, "param    indirect (TRTRI | TRMM | POTRF)  direct")?;
        for p in Parameterization::ALL {
            writeln!(
                w,
                "{:<8} {:<32} {}",
                p.symbol(),
                opcount::render_compact(p, Algorithm::Indirect),
                opcount::render_compact(p, Algorithm::Direct)
            )?;
        }
        Ok(())
    })?;
    if rows.iter().all(|r| r.matches()) {
        Ok(())
    } else {
        Err(Failure::Checks(opcount::verdict(&rows)))
    }
}

fn cmd_validate(a: ValidateArgs) -> CmdResult {
    let records = suite::run_suite(a.seed, &a.only, a.jobs.max(1))?;
    emit(a.out.as_deref(), |w| {
        records.iter().try_for_each(|r| {
            serde_json::to_writer(&mut *w, r)?;
            writeln!(w)
        })
    })?;
    for r in &records {
        eprintln!("{} {}", if r.pass { "PASS" } else { "FAIL" }, r.check);
    }
    let failed: Vec<_> = records
        .iter()
        .filter(|r| !r.pass)
        .map(|r| r.check.as_str())
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Checks(format!(
            "{} check(s) failed: {}",
            failed.len(),
            failed.join(", ")
        )))
    }
}

fn cmd_bench(a: BenchArgs) -> CmdResult {
    let rows = bench::run(&BenchConfig {
        dims: a.m,
        param: Parameterization::from_flags(a.iscov, a.ischolu),
        retcholu: a.retcholu,
        repetitions: a.repetitions,
        seed: a.seed,
    })?;
    emit(None, |w| write!(w, "{}", bench::render(&rows)))
}
