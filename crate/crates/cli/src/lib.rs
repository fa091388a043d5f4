//! Batch front end for `wigrot-core`: coefficient tables, validation suites,
//! noise experiments, bound grids and timings.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

mod commands;
pub mod format;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_ENGINE: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("{0}")]
    Engine(#[from] wigrot_core::Error),
    #[error("{0}")]
    Validation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_IO,
            CliError::Engine(_) => EXIT_ENGINE,
            CliError::Validation(_) => EXIT_VALIDATION,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "wigrot", version, about = "Rotation coefficients of spherical-harmonic expansions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Compute coefficients for one degree or all degrees up to p
    Compute(ComputeArgs),
    /// Run self-consistency checks against the acceptance thresholds
    Validate(ValidateArgs),
    /// Noise amplification experiment on the recursion
    Noise(NoiseArgs),
    /// Magnitude, decay exponent and turning-point region on a (mu', mu) grid
    Bounds(BoundsArgs),
    /// Median wall time per degree and engine
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AlgoArg {
    Recursive,
    FftBasic,
    FftModified,
}

impl From<AlgoArg> for wigrot_core::Algorithm {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Recursive => wigrot_core::Algorithm::Recursive,
            AlgoArg::FftBasic => wigrot_core::Algorithm::FftBasic,
            AlgoArg::FftModified => wigrot_core::Algorithm::FftModified,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
    Bin,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TableFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Uniform,
    Coherent,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, ValueEnum)]
pub enum CheckArg {
    Unitarity,
    Symmetry,
    Oracle,
    Flip,
    Cross,
    Bounds,
}

#[derive(Args, Debug)]
pub struct OutArg {
    /// Output file; standard output when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("degree").required(true).args(["n", "p"])))]
pub struct ComputeArgs {
    /// Single degree
    #[arg(long)]
    pub n: Option<u32>,
    /// All degrees 0..=p
    #[arg(long)]
    pub p: Option<u32>,
    /// Rotation angle; any finite value, folded into [0, pi]
    #[arg(long, allow_hyphen_values = true)]
    pub beta: f64,
    /// Interpret angles in degrees
    #[arg(long)]
    pub degrees: bool,
    #[arg(long, value_enum, default_value = "recursive")]
    pub algo: AlgoArg,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: FormatArg,
    /// Emit the full (2n+1)^2 matrix instead of the stored triangle
    #[arg(long)]
    pub dense: bool,
    /// Emit Wigner d-matrix values instead of H
    #[arg(long)]
    pub d_matrix: bool,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    #[arg(long)]
    pub n_max: u32,
    /// Comma-separated angles; defaults to 0, pi/4, pi/2, 3pi/4, pi
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub beta_list: Option<Vec<f64>>,
    #[arg(long)]
    pub degrees: bool,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "unitarity,symmetry,oracle,flip,cross,bounds")]
    pub checks: Vec<CheckArg>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: TableFormat,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Args, Debug)]
pub struct NoiseArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub n_list: Vec<u32>,
    #[arg(long, value_enum, default_value = "coherent")]
    pub model: ModelArg,
    #[arg(long, default_value_t = 10)]
    pub trials: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Emit the |eta| map of trial 0 at the first degree instead of growth factors
    #[arg(long)]
    pub dump_grid: bool,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: TableFormat,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: f64,
    #[arg(long)]
    pub degrees: bool,
    /// Odd number of points per axis over [-1, 1]
    #[arg(long, default_value_t = 101)]
    pub grid: u32,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: TableFormat,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub n_list: Vec<u32>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "recursive,fft-modified")]
    pub algos: Vec<AlgoArg>,
    #[arg(long, default_value_t = 3)]
    pub repeat: u32,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub beta: f64,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: TableFormat,
    #[command(flatten)]
    pub out: OutArg,
}

/// Sizes the worker pool from `WIGROT_THREADS` (0 or unset means automatic).
fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("WIGROT_THREADS") else {
        return Ok(());
    };
    let k: usize =
        raw.trim().parse().map_err(|_| CliError::Usage(format!("WIGROT_THREADS = '{raw}' is not a count")))?;
    // A pool set up earlier in the same process is kept.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
    Ok(())
}

fn open_out(
    out: &OutArg,
    stdout: &mut dyn Write,
    f: impl FnOnce(&mut dyn Write) -> Result<(), CliError>,
) -> Result<(), CliError> {
    match &out.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            f(&mut w)?;
            w.flush()?;
            Ok(())
        }
        None => f(stdout),
    }
}

/// Parses `args` (program name first) and runs the command, writing results
/// to `stdout` and diagnostics to `stderr`. Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = init_threads().and_then(|()| match &cli.command {
        Command::Compute(a) => open_out(&a.out, stdout, |w| commands::compute(a, w)),
        Command::Validate(a) => open_out(&a.out, stdout, |w| commands::validate(a, w, stderr)),
        Command::Noise(a) => open_out(&a.out, stdout, |w| commands::noise(a, w)),
        Command::Bounds(a) => open_out(&a.out, stdout, |w| commands::bounds(a, w)),
        Command::Bench(a) => open_out(&a.out, stdout, |w| commands::bench(a, w)),
    });
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "wigrot: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Validation("x".into()).exit_code(), EXIT_VALIDATION);
        assert_eq!(CliError::Usage("x".into()).exit_code(), EXIT_USAGE);
        assert_eq!(CliError::Io(io::Error::other("x")).exit_code(), EXIT_IO);
        assert_eq!(CliError::Engine(wigrot_core::Error::Domain("x".into())).exit_code(), EXIT_ENGINE);
    }

    #[test]
    fn help_is_not_an_error() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(run(["wigrot", "--version"], &mut out, &mut err), EXIT_OK);
        assert_eq!(run(["wigrot", "compute"], &mut out, &mut err), EXIT_USAGE);
    }
}
