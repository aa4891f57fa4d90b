mod commands;
mod parse;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use phase_ovm::OvmError;

const USAGE: u8 = 2;
pub(crate) const NUMERICAL: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "phase-ovm", version, about = "Phase-space region operators and quasi-probability masses")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a region operator and write it with its checks.
    Build(BuildArgs),
    /// Quasi-probability mass of a phase-plane region, by operator trace and by field integral.
    Mass(MassArgs),
    /// Run a named verification; exits 0 iff it passes.
    Verify(VerifyArgs),
    /// Sample an s-parametrized quasi-probability field on a grid.
    Field(FieldArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Bin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PathArg {
    Analytic,
    Smeared,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ShiftArg {
    Left,
    Right,
    Conjugate,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Output file; standard output when omitted (not for --format bin).
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn dim_in_range(s: &str) -> Result<usize, String> {
    let d: usize = s.parse().map_err(|_| format!("'{s}' is not an integer"))?;
    if (8..=256).contains(&d) {
        Ok(d)
    } else {
        Err(format!("dim must lie in [8, 256], got {d}"))
    }
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    /// Region descriptor, e.g. circle:a=1, interval:-1,1, rect:-1,1,-1,1, JSON or @file.
    #[arg(long)]
    region: String,
    #[arg(long, default_value_t = 48, value_parser = dim_in_range)]
    dim: usize,
    /// Construction path; defaults to analytic where one exists, oracle for area regions.
    #[arg(long, value_enum)]
    path: Option<PathArg>,
    /// Gauss–Legendre points of smeared and disc constructions.
    #[arg(long, default_value_t = 64)]
    quadrature: usize,
    /// Oracle grid `qmin,qmax,pmin,pmax,nq,np`.
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    /// Rotate by e^{iθN} after construction.
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<f64>,
    /// Shift by c along momentum after construction.
    #[arg(long, allow_hyphen_values = true)]
    c: Option<f64>,
    #[arg(long, value_enum, default_value = "left")]
    shift_mode: ShiftArg,
    /// Squeeze by r after construction.
    #[arg(long, allow_hyphen_values = true)]
    r: Option<f64>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[command(flatten)]
    out: Output,
}

#[derive(Debug, Args)]
pub struct MassArgs {
    /// Phase-plane region: disk:r=, rect:, disc:a=, empty, JSON or @file.
    #[arg(long)]
    region: String,
    /// vacuum, fock:n, coherent:re,im, squeezed:r or coeffs:c0,c1,...
    #[arg(long, default_value = "vacuum")]
    state: String,
    #[arg(long, default_value_t = 32, value_parser = dim_in_range)]
    dim: usize,
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    s: f64,
    /// bare or two_over_pi.
    #[arg(long, default_value = "bare")]
    convention: String,
    #[command(flatten)]
    out: Output,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// circle, disc, segment, interval, kraus, dilation, parity-sum, quasiprob, rotation, shift, squeeze or comb.
    #[arg(long)]
    target: String,
    /// Truncation; per mode for dilation and parity-sum.
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    a0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    b: Option<f64>,
    #[arg(long = "L")]
    l: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    c: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    r: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    draws: Option<usize>,
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    quadrature: Option<usize>,
    #[command(flatten)]
    out: Output,
}

#[derive(Debug, Args)]
pub struct FieldArgs {
    #[arg(long, default_value = "vacuum")]
    state: String,
    #[arg(long, default_value_t = 32, value_parser = dim_in_range)]
    dim: usize,
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    s: f64,
    #[arg(long, default_value = "bare")]
    convention: String,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[command(flatten)]
    out: Output,
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: USAGE,
            message: message.into(),
        }
    }
}

impl From<OvmError> for Failure {
    fn from(e: OvmError) -> Self {
        Self {
            code: if e.is_numerical() { NUMERICAL } else { USAGE },
            message: e.to_string(),
        }
    }
}

fn init_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("PHASE_OVM_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::usage(format!("PHASE_OVM_THREADS must be a positive integer, got '{v}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::usage(format!("thread pool: {e}")))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let run = || -> Result<u8, Failure> {
        init_threads()?;
        match cli.command {
            Command::Build(a) => commands::build(a),
            Command::Mass(a) => commands::mass(a),
            Command::Verify(a) => commands::verify(a),
            Command::Field(a) => commands::field(a),
        }
    };
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("phase-ovm: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
