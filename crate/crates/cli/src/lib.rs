//! Command-line front end: argument parsing, dispatch and exit codes.
//!
//! Exit codes are `0` on success, `2` for usage or validation errors and `3`
//! for numerical failures (integration breakdown, failed verification).

mod commands;
pub mod format;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sociolorenz::{Error, ParamSet, State};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "sociolorenz",
    version,
    about = "Simulate and analyse the three-variable transmission/perception/memory model"
)]
pub struct Cli {
    /// Worker threads for parallel work (default: all cores).
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..))]
    pub threads: Option<u32>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ParamArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub sigma: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub r0: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: f64,
}

impl ParamArgs {
    fn build(&self) -> sociolorenz::Result<ParamSet> {
        ParamSet::new(self.sigma, self.r0, self.beta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Rk4,
    Adaptive,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one trajectory and write its samples.
    Simulate {
        #[command(flatten)]
        params: ParamArgs,
        /// Initial condition as `T,I,M`.
        #[arg(long, value_parser = parse_triple, allow_hyphen_values = true)]
        x0: [f64; 3],
        #[arg(long, allow_hyphen_values = true)]
        t_end: f64,
        #[arg(long, value_enum, default_value_t = MethodArg::Rk4)]
        method: MethodArg,
        /// RK4 step, or initial step of the adaptive pair.
        #[arg(long, default_value_t = 0.01, allow_hyphen_values = true)]
        h: f64,
        /// Absolute and relative tolerance of the adaptive pair.
        #[arg(long, default_value_t = 1e-9, allow_hyphen_values = true)]
        tol: f64,
        /// Keep every n-th step (the final state is always kept).
        #[arg(long, default_value_t = 1)]
        stride: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List equilibria with eigenvalues and stability labels.
    Equilibria {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify regimes on a uniform grid of `r0` values.
    Scan {
        #[arg(long, allow_hyphen_values = true)]
        sigma: f64,
        #[arg(long, allow_hyphen_values = true)]
        beta: f64,
        #[arg(long, allow_hyphen_values = true)]
        r0_min: f64,
        #[arg(long, allow_hyphen_values = true)]
        r0_max: f64,
        /// Number of grid points, endpoints included.
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate the Lyapunov spectrum along a trajectory.
    Lyapunov {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_parser = parse_triple, allow_hyphen_values = true, default_value = "1,1,1")]
        x0: [f64; 3],
        #[arg(long, default_value_t = 1000.0, allow_hyphen_values = true)]
        horizon: f64,
        #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
        renorm_dt: f64,
        #[arg(long, default_value_t = 50.0, allow_hyphen_values = true)]
        transient: f64,
        #[arg(long, default_value_t = 0.01, allow_hyphen_values = true)]
        h: f64,
    },
    /// Check dissipativity, equilibrium residuals and stability consistency.
    Verify {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

fn parse_triple(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected T,I,M, got {s:?}"));
    }
    let mut out = [0.0; 3];
    for (slot, part) in out.iter_mut().zip(&parts) {
        *slot = part.parse().map_err(|e| format!("{part:?}: {e}"))?;
    }
    Ok(out)
}

fn initial_state(x0: [f64; 3]) -> sociolorenz::Result<State> {
    State::new(x0[0], x0[1], x0[2])
}

/// Failure carrying the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn numerical(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_NUMERICAL,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::StepUnderflow { .. }
            | Error::MaxStepsExceeded { .. }
            | Error::NonFiniteTrajectory { .. }
            | Error::Inconsistent(_) => CliError::numerical(e.to_string()),
            _ => CliError::usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::usage(format!("i/o error: {e}"))
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code. Reports go to `stdout` unless `--out` is given; diagnostics go
/// to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut (dyn Write + Send), stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{rendered}");
                EXIT_USAGE
            } else {
                let _ = write!(stdout, "{rendered}");
                EXIT_OK
            };
        }
    };

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        builder = builder.num_threads(n as usize);
    }
    let result = match builder.build() {
        Ok(pool) => pool.install(|| commands::dispatch(&cli.command, stdout)),
        Err(e) => Err(CliError::usage(format!("thread pool: {e}"))),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message);
            e.code
        }
    }
}
