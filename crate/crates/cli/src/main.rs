//! `lapsim`: reproduces the forced-wave convergence experiment and exposes the
//! solvers, oracles and diagnostics as subcommands.
//!
//! Exit codes: 0 success, 1 a threshold check failed, 2 configuration or I/O
//! error, 3 solver failure.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug)]
pub enum Failure {
    Threshold(String),
    Config(String),
    Solver { stage: String, error: lapsim::Error },
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Threshold(_) => 1,
            Failure::Config(_) => 2,
            Failure::Solver { .. } => 3,
        }
    }

    /// Wraps a library error; configuration-type errors keep exit code 2.
    pub fn solver(stage: impl Into<String>) -> impl FnOnce(lapsim::Error) -> Failure {
        let stage = stage.into();
        move |error| match error {
            lapsim::Error::Config(m) | lapsim::Error::Domain(m) => Failure::Config(format!("{stage}: {m}")),
            lapsim::Error::Io(e) => Failure::Config(format!("{stage}: {e}")),
            error => Failure::Solver { stage, error },
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Threshold(m) => write!(f, "threshold check failed: {m}"),
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Solver { stage, error } => write!(f, "solver failure in {stage}: {error}"),
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "lapsim",
    version,
    about = "Limiting amplitude principle simulation and verification suite"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug)]
pub struct Common {
    /// TOML configuration file (one table per subcommand).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; falls back to the config file, then $LAPSIM_OUT.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Run batch work on one thread.
    #[arg(long, global = true)]
    pub sequential: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Forced runs for d = 1, 2, 3 with decay fits of E(t).
    FigureB(FigureBArgs),
    /// Solver and special-function cross-checks at reduced scale.
    Validate(ValidateArgs),
    /// Ray tracing and the non-trapping scan.
    Raytrace(RaytraceArgs),
    /// Free-decay, decaying-forcing and slow-decay oracle experiments.
    Decay(DecayArgs),
    /// Radial Helmholtz solve with the outgoing boundary condition.
    Helmholtz(HelmholtzArgs),
    /// Time-domain run with optional snapshots.
    Wave(WaveArgs),
}

#[derive(Args, Debug)]
pub struct FigureBArgs {
    /// Comma-separated dimensions.
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
    #[arg(long)]
    pub r0: Option<f64>,
    #[arg(long)]
    pub r_max: Option<f64>,
    #[arg(long)]
    pub dr: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t_final: Option<f64>,
    /// Record E(t) every this many steps.
    #[arg(long)]
    pub every: Option<usize>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Wave,
    Helmholtz,
    Oscillatory,
    Hankel,
    Rays,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    /// Restrict to these check families (repeatable).
    #[arg(long, value_enum)]
    pub only: Vec<Family>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fixture {
    /// The configured medium (the benchmark unless overridden).
    Medium,
    Trapping,
    Smooth,
}

#[derive(Args, Debug)]
pub struct RaytraceArgs {
    #[arg(long, value_enum)]
    pub fixture: Option<Fixture>,
    #[arg(long)]
    pub positions: Option<usize>,
    #[arg(long)]
    pub directions: Option<usize>,
    /// Random sampling with this seed instead of the regular grid.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t_final: Option<f64>,
    #[arg(long)]
    pub r_escape: Option<f64>,
    /// Trace one ray from QX QY PX PY and write its trajectory.
    #[arg(long, num_args = 4, value_names = ["QX", "QY", "PX", "PY"], allow_negative_numbers = true)]
    pub single: Option<Vec<f64>>,
    /// Rescale the --single momentum onto the zero level set.
    #[arg(long)]
    pub normalize: bool,
    #[arg(long)]
    pub record_every: Option<usize>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecayMode {
    /// Free decay of Gaussian data in a unit medium.
    Ic,
    /// Zero data with forcing decaying like (1 + t^2)^(-p/2).
    Forced,
    /// Slow-decay data through the Poisson/Kirchhoff oracles.
    Lemma,
}

#[derive(Args, Debug)]
pub struct DecayArgs {
    #[arg(long, value_enum)]
    pub mode: Option<DecayMode>,
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
    #[arg(long)]
    pub r_max: Option<f64>,
    #[arg(long)]
    pub dr: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t_final: Option<f64>,
    #[arg(long)]
    pub r0: Option<f64>,
    /// Amplitude of the Gaussian data (0 gives the trivial run).
    #[arg(long)]
    pub amplitude: Option<f64>,
    #[arg(long)]
    pub width: Option<f64>,
    /// Forcing decay power for `--mode forced`.
    #[arg(long)]
    pub p: Option<f64>,
    /// Time samples for `--mode lemma`.
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Args, Debug)]
pub struct HelmholtzArgs {
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub r_max: Option<f64>,
    #[arg(long)]
    pub dr: Option<f64>,
    /// Overrides the source frequency.
    #[arg(long)]
    pub omega: Option<f64>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ForcingKind {
    None,
    Harmonic,
}

#[derive(Args, Debug)]
pub struct WaveArgs {
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub r_max: Option<f64>,
    #[arg(long)]
    pub dr: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t_final: Option<f64>,
    #[arg(long, value_enum)]
    pub forcing: Option<ForcingKind>,
    /// Comma-separated snapshot times.
    #[arg(long, value_delimiter = ',')]
    pub snapshots: Option<Vec<f64>>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::dispatch(cli) {
        Ok(dir) => {
            println!("artifacts in {}", dir.display());
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("lapsim: {f}");
            ExitCode::from(f.code())
        }
    }
}
