//! Command-line front end.
//!
//! Exit codes: 0 success, 1 inequality violation, 2 invalid input,
//! 3 divergent constant. Reports go to stdout, diagnostics to stderr.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde_json::json;

use crate::config::{ConfigSpec, PartitionSpec};
use crate::constants::{
    generalized_rho, geometric_sharp_constant, lacunary_bound, rho, BoundReport,
};
use crate::error::HardyError;
use crate::extremal::{
    default_grid, extremal_l2_norm_sq, extremal_lhs_sum, extremal_ratio, sharpness_sweep,
    ExtremalParams,
};
use crate::operator::{truncated_operator_norm_seeded, verify_main_inequality, TruncatedSequence};
use crate::partitions::{AveragingConfig, NormingScheme, WeightScheme};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_DIVERGENT: i32 = 3;

const NORM_MAX_ITERS: usize = 200_000;
const MAX_SEQUENCE_LEN: f64 = (1u64 << 24) as f64;

#[derive(Debug, Parser)]
#[command(
    name = "hardy",
    about = "Weighted Hardy-type averaging operators: constants, verification, sharpness"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Configuration document (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Table)]
    pub output: OutputFormat,

    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,

    /// Random sequences drawn by `verify`.
    #[arg(long, global = true, default_value_t = 1000)]
    pub samples: usize,

    /// Tolerance on neglected tails (constants) or Rayleigh-quotient change (norm).
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol: f64,

    /// Truncation level K; defaults to the explicit blocks of the config.
    #[arg(long, global = true)]
    pub blocks: Option<usize>,

    /// Geometric base b for `extremal` and `sweep`.
    #[arg(long, global = true)]
    pub base: Option<u64>,

    /// Comma-separated r values, decreasing toward sqrt(b).
    #[arg(long, global = true, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Print every applicable bound constant.
    Bounds,
    /// Check the inequality on random complex sequences.
    Verify,
    /// Truncated operator norms for K = 1..blocks (p = 2).
    Norm,
    /// Closed-form series of the extremal family on a grid of r.
    Extremal,
    /// Ratio of the extremal family against the sharp constant.
    Sweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Table,
    Json,
    Csv,
}

/// A parsed invocation.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub subcommand: Command,
    pub config_path: Option<PathBuf>,
    pub output_format: OutputFormat,
    pub seed: u64,
    pub samples: usize,
    pub tolerance: f64,
    pub blocks: Option<usize>,
    pub base: Option<u64>,
    pub grid: Option<Vec<f64>>,
}

impl From<Cli> for RunSpec {
    fn from(cli: Cli) -> Self {
        Self {
            subcommand: cli.command,
            config_path: cli.config,
            output_format: cli.output,
            seed: cli.seed,
            samples: cli.samples,
            tolerance: cli.tol,
            blocks: cli.blocks,
            base: cli.base,
            grid: cli.grid,
        }
    }
}

/// A failure that maps onto an exit code.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn invalid(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INVALID,
            message: message.into(),
        }
    }
}

impl From<HardyError> for Failure {
    fn from(e: HardyError) -> Self {
        Failure::invalid(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::invalid(format!("write failed: {e}"))
    }
}

type CmdResult = Result<i32, Failure>;

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return e.exit_code();
        }
    };
    run_spec(&RunSpec::from(cli), out, err)
}

pub fn run_spec(spec: &RunSpec, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = if !(spec.tolerance.is_finite() && spec.tolerance > 0.0) {
        Err(Failure::invalid(format!(
            "--tol must be positive, got {}",
            spec.tolerance
        )))
    } else {
        match spec.subcommand {
            Command::Bounds => cmd_bounds(spec, out, err),
            Command::Verify => cmd_verify(spec, out, err),
            Command::Norm => cmd_norm(spec, out, err),
            Command::Extremal => cmd_extremal(spec, out, err),
            Command::Sweep => cmd_sweep(spec, out, err),
        }
    };
    match result {
        Ok(code) => code,
        Err(failure) => {
            let _ = writeln!(err, "error: {}", failure.message);
            failure.code
        }
    }
}

/// 17 significant digits.
fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

fn load_config(spec: &RunSpec) -> Result<(ConfigSpec, AveragingConfig, String), Failure> {
    let path = spec
        .config_path
        .as_deref()
        .ok_or_else(|| Failure::invalid("--config is required for this subcommand"))?;
    let doc = ConfigSpec::from_path(path)?;
    let config = doc.build()?;
    Ok((doc, config, config_id(path)))
}

fn config_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "config".into())
}

fn truncation_level(spec: &RunSpec, config: &AveragingConfig) -> Result<usize, Failure> {
    match spec.blocks {
        Some(0) => Err(Failure::invalid("--blocks must be >= 1")),
        Some(k) => Ok(k),
        None => Ok(config.partition.len()),
    }
}

/// Lacunary ratio when the config fits the lacunary bound:
/// unit weights and `M_k = n_k^(1/q)`.
fn lacunary_ratio(config: &AveragingConfig) -> Option<f64> {
    if config.weights != WeightScheme::ConstantOne
        || config.norming != NormingScheme::RootOfBoundary
    {
        return None;
    }
    config.partition.min_boundary_ratio().filter(|&r| r > 1.0)
}

fn cmd_bounds(spec: &RunSpec, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let (doc, config, id) = load_config(spec)?;
    let tol = spec.tolerance;
    let mut rows: Vec<(&str, BoundReport)> = Vec::new();
    if config.norming == NormingScheme::Derived {
        rows.push(("rho", rho(&config, tol)?));
    }
    rows.push(("generalized_rho", generalized_rho(&config, tol)?));
    let ratio = lacunary_ratio(&config);
    if let Some(r) = ratio {
        rows.push((
            "lacunary_bound",
            BoundReport::exact(lacunary_bound(r, config.q())?),
        ));
    }
    if let (Some(b), true) = (
        doc.geometric_base(),
        config.p() == 2.0
            && config.weights == WeightScheme::ConstantOne
            && config.norming == NormingScheme::RootOfBoundary,
    ) {
        let sharp = geometric_sharp_constant(b)?;
        rows.push(("sharp_constant", BoundReport::exact(sharp)));
        rows.push(("rho_prime_bound", BoundReport::exact(sharp * sharp)));
    }

    match spec.output_format {
        OutputFormat::Table => {
            writeln!(out, "config: {id}  p = {}  q = {}", config.p(), config.q())?;
            if let Some(r) = ratio {
                writeln!(out, "lacunary ratio r = {}", fmt_float(r))?;
            }
            writeln!(
                out,
                "{:<18} {:>24} {:>10} {:>24} {:>9}",
                "name", "constant", "level", "tail_bound", "converged"
            )?;
            for (name, report) in &rows {
                writeln!(
                    out,
                    "{:<18} {:>24} {:>10} {:>24} {:>9}",
                    name,
                    fmt_float(report.constant),
                    report.truncation_level,
                    fmt_float(report.tail_bound),
                    report.converged
                )?;
            }
        }
        OutputFormat::Csv => {
            writeln!(out, "name,constant,truncation_level,tail_bound,converged")?;
            for (name, report) in &rows {
                writeln!(
                    out,
                    "{name},{},{},{},{}",
                    fmt_float(report.constant),
                    report.truncation_level,
                    fmt_float(report.tail_bound),
                    report.converged
                )?;
            }
        }
        OutputFormat::Json => {
            let bounds: serde_json::Map<String, serde_json::Value> = rows
                .iter()
                .map(|(name, report)| (name.to_string(), serde_json::to_value(report).unwrap()))
                .collect();
            let doc = json!({
                "config": id,
                "p": config.p(),
                "q": config.q(),
                "lacunary_ratio": ratio,
                "bounds": bounds,
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&doc).unwrap())?;
        }
    }

    let unconverged = rows.iter().find(|(_, report)| !report.converged);
    if let Some((name, report)) = unconverged {
        if report.constant.is_infinite() {
            writeln!(err, "{name}: constant diverges")?;
        } else {
            writeln!(
                err,
                "{name}: constant did not converge within the scan budget"
            )?;
        }
        return Ok(EXIT_DIVERGENT);
    }
    Ok(EXIT_OK)
}

fn random_sequence(rng: &mut ChaCha8Rng, len: usize) -> TruncatedSequence {
    // Standard complex normal: independent N(0, 1/2) parts.
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let values = (0..len)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(scale * re, scale * im)
        })
        .collect();
    TruncatedSequence::new(values).expect("normal samples are finite")
}

fn cmd_verify(spec: &RunSpec, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    if spec.samples == 0 {
        return Err(Failure::invalid("--samples must be >= 1"));
    }
    let (doc, config, id) = load_config(spec)?;
    let blocks = truncation_level(spec, &config)?;

    let (label, constant) = match (&doc.partition, lacunary_ratio(&config)) {
        (PartitionSpec::Lacunary { .. }, Some(r)) => (
            "lacunary_bound",
            BoundReport::exact(lacunary_bound(r, config.q())?),
        ),
        _ => ("generalized_rho", generalized_rho(&config, spec.tolerance)?),
    };
    if !constant.converged {
        writeln!(err, "{label}: constant diverges")?;
        return Ok(EXIT_DIVERGENT);
    }
    let len = config.partition.boundary(blocks)?;
    if len > MAX_SEQUENCE_LEN {
        return Err(Failure::invalid(format!(
            "sequence length n_K = {len} is too large; lower --blocks"
        )));
    }
    let len = len as usize;

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut reports = Vec::with_capacity(spec.samples);
    for _ in 0..spec.samples {
        let a = random_sequence(&mut rng, len);
        reports.push(verify_main_inequality(&a, &config, &constant)?);
    }
    let violations = reports.iter().filter(|r| !r.holds).count();

    match spec.output_format {
        OutputFormat::Csv => {
            writeln!(out, "config_id,sample_id,lhs,rhs_norm,constant,slack,holds")?;
            for (i, r) in reports.iter().enumerate() {
                writeln!(
                    out,
                    "{id},{i},{},{},{},{},{}",
                    fmt_float(r.lhs),
                    fmt_float(r.rhs_norm),
                    fmt_float(r.bound_constant),
                    fmt_float(r.slack),
                    r.holds
                )?;
            }
        }
        OutputFormat::Json => {
            let rows: Vec<_> = reports
                .iter()
                .enumerate()
                .map(|(i, r)| json!({"config_id": id, "sample_id": i, "report": r}))
                .collect();
            writeln!(out, "{}", serde_json::to_string_pretty(&rows).unwrap())?;
        }
        OutputFormat::Table => {
            let worst = reports
                .iter()
                .map(|r| r.lhs / r.rhs_norm)
                .filter(|x| x.is_finite())
                .fold(0.0_f64, f64::max);
            writeln!(
                out,
                "config: {id}  p = {}  blocks = {blocks}  n = {len}",
                config.p()
            )?;
            writeln!(out, "constant ({label}): {}", fmt_float(constant.constant))?;
            writeln!(out, "samples: {}  violations: {violations}", reports.len())?;
            writeln!(out, "largest lhs / rhs_norm: {}", fmt_float(worst))?;
        }
    }
    if violations > 0 {
        writeln!(err, "{violations} sample(s) violate the inequality")?;
        return Ok(EXIT_VIOLATION);
    }
    Ok(EXIT_OK)
}

fn cmd_norm(spec: &RunSpec, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let (doc, config, id) = load_config(spec)?;
    let blocks = truncation_level(spec, &config)?;
    let mut rows = Vec::with_capacity(blocks);
    for k in 1..=blocks {
        let estimate =
            truncated_operator_norm_seeded(&config, k, spec.tolerance, NORM_MAX_ITERS, spec.seed)?;
        let n_k = config.partition.boundary(k)?;
        rows.push((k, n_k, estimate));
    }
    let sharp = doc
        .geometric_base()
        .filter(|_| config.weights == WeightScheme::ConstantOne)
        .filter(|_| config.norming == NormingScheme::RootOfBoundary)
        .map(geometric_sharp_constant)
        .transpose()?;

    match spec.output_format {
        OutputFormat::Csv => {
            writeln!(out, "blocks,n,norm,iterations,converged")?;
            for (k, n, e) in &rows {
                writeln!(
                    out,
                    "{k},{n},{},{},{}",
                    fmt_float(e.value),
                    e.iterations,
                    e.converged
                )?;
            }
        }
        OutputFormat::Json => {
            let items: Vec<_> = rows
                .iter()
                .map(|(k, n, e)| json!({"blocks": k, "n": n, "estimate": e}))
                .collect();
            let doc = json!({"config": id, "sharp_constant": sharp, "norms": items});
            writeln!(out, "{}", serde_json::to_string_pretty(&doc).unwrap())?;
        }
        OutputFormat::Table => {
            writeln!(out, "config: {id}")?;
            if let Some(s) = sharp {
                writeln!(out, "sharp constant: {}", fmt_float(s))?;
            }
            writeln!(
                out,
                "{:>6} {:>12} {:>24} {:>10} {:>9}",
                "K", "n_K", "norm", "iters", "converged"
            )?;
            for (k, n, e) in &rows {
                writeln!(
                    out,
                    "{k:>6} {n:>12} {:>24} {:>10} {:>9}",
                    fmt_float(e.value),
                    e.iterations,
                    e.converged
                )?;
            }
        }
    }
    if rows.iter().any(|(_, _, e)| !e.converged) {
        writeln!(
            err,
            "warning: power iteration hit the iteration cap for some K"
        )?;
    }
    Ok(EXIT_OK)
}

fn sweep_inputs(spec: &RunSpec) -> Result<(u64, Vec<f64>), Failure> {
    let base = match (spec.base, &spec.config_path) {
        (Some(b), _) => b,
        (None, Some(_)) => {
            let (doc, _, _) = load_config(spec)?;
            doc.geometric_base()
                .ok_or_else(|| Failure::invalid("config partition is not geometric; pass --base"))?
        }
        (None, None) => return Err(Failure::invalid("--base is required")),
    };
    if base < 2 {
        return Err(HardyError::InvalidBase(base).into());
    }
    let grid = spec.grid.clone().unwrap_or_else(|| default_grid(base, 5));
    Ok((base, grid))
}

fn cmd_extremal(spec: &RunSpec, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let (b, grid) = sweep_inputs(spec)?;
    let sharp = geometric_sharp_constant(b)?;
    let mut rows = Vec::new();
    for &r in &grid {
        match ExtremalParams::new(b, r) {
            Ok(params) => rows.push((
                r,
                extremal_l2_norm_sq(&params),
                extremal_lhs_sum(&params),
                extremal_ratio(&params),
            )),
            Err(e) => writeln!(err, "skipping r = {r}: {e}")?,
        }
    }
    match spec.output_format {
        OutputFormat::Csv | OutputFormat::Table => {
            writeln!(out, "r,l2_norm_sq,lhs_sum,ratio,sharp_constant")?;
            for (r, l2, lhs, ratio) in &rows {
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    fmt_float(*r),
                    fmt_float(*l2),
                    fmt_float(*lhs),
                    fmt_float(*ratio),
                    fmt_float(sharp)
                )?;
            }
        }
        OutputFormat::Json => {
            let items: Vec<_> = rows
                .iter()
                .map(|(r, l2, lhs, ratio)| {
                    json!({"r": r, "l2_norm_sq": l2, "lhs_sum": lhs, "ratio": ratio})
                })
                .collect();
            let doc = json!({"b": b, "sharp_constant": sharp, "rows": items});
            writeln!(out, "{}", serde_json::to_string_pretty(&doc).unwrap())?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_sweep(spec: &RunSpec, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let (b, grid) = sweep_inputs(spec)?;
    let table = sharpness_sweep(b, &grid)?;
    for r in &table.skipped {
        writeln!(err, "skipping r = {r}: outside sqrt({b}) < r < {b}")?;
    }
    match spec.output_format {
        OutputFormat::Csv | OutputFormat::Table => {
            writeln!(out, "r,ratio,sharp_constant,gap")?;
            for row in &table.rows {
                writeln!(
                    out,
                    "{},{},{},{}",
                    fmt_float(row.r),
                    fmt_float(row.ratio),
                    fmt_float(row.sharp_constant),
                    fmt_float(row.gap)
                )?;
            }
        }
        OutputFormat::Json => {
            writeln!(out, "{}", serde_json::to_string_pretty(&table).unwrap())?;
        }
    }
    Ok(EXIT_OK)
}
