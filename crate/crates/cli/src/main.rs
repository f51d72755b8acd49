mod args;
mod cache;
mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use args::{CList, ModelArgs, RList, Tol};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Lab(#[from] bergman_lab::Error),
    /// A check ran to completion and reported failure.
    #[error("{0}")]
    CheckFailed(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Lab(e) if e.is_computational() => 1,
            CliError::CheckFailed(_) => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "bergman", version, about = "Bergman kernel, curvature and minimum-integral laboratory")]
struct Cli {
    /// Tolerance override `name=value` (drop, c, fd-step, slack).
    #[arg(long, global = true)]
    tol: Vec<Tol>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a truncated Bergman space and write it as JSON.
    Build {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Kernel value and derivative table at a point.
    Kernel {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, allow_hyphen_values = true)]
        point: CList,
        /// CSV of the derivative table.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Metric and curvatures at a point.
    Curv {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, allow_hyphen_values = true)]
        point: CList,
        #[arg(long = "X", allow_hyphen_values = true)]
        x: CList,
        /// Defaults to X.
        #[arg(long = "Y", allow_hyphen_values = true)]
        y: Option<CList>,
        /// Random direction pairs for the extremes of B.
        #[arg(long, default_value_t = 0)]
        samples: usize,
    },
    /// Minimum integrals and the identity residuals.
    Minint {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, allow_hyphen_values = true)]
        point: CList,
        #[arg(long = "X", allow_hyphen_values = true)]
        x: CList,
        #[arg(long = "Y", allow_hyphen_values = true)]
        y: Option<CList>,
    },
    /// Curvature along the inward normal toward a boundary point.
    Sweep {
        #[command(flatten)]
        model: ModelArgs,
        /// Boundary point (or nearby point with --project).
        #[arg(long, allow_hyphen_values = true)]
        point: CList,
        #[arg(long)]
        project: bool,
        /// Strictly decreasing distances.
        #[arg(long)]
        t_grid: RList,
        #[arg(long, default_value_t = 50)]
        pairs: usize,
        /// CSV path; metadata goes next to it as `<out>.meta.json`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Localization ratios of the minimum integrals.
    Localize {
        /// Configuration JSON; defaults to the unit-ball example.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "0.5,0.3,0.2,0.1,0.05")]
        t_grid: RList,
        #[arg(long, default_value_t = 10)]
        degree: u32,
        #[arg(long, default_value_t = 200_000)]
        draws: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare K and g with those of an inscribed polydisc (C from --tol c=).
    Squeeze {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, allow_hyphen_values = true)]
        point: CList,
        #[arg(long)]
        radii: RList,
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// Check the hypotheses on a weight function (C from --tol c=).
    CheckWeight {
        /// diagonal-quadratic, negative-norm or anisotropic-quadratic.
        #[arg(long)]
        weight: String,
        /// Polydisc radii for the polydisc presets.
        #[arg(long)]
        radii: Option<RList>,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 0.01)]
        delta: f64,
        #[arg(long, default_value_t = 0)]
        ell: usize,
        /// Domain to intersect the box with (JSON); defaults per preset.
        #[arg(long)]
        domain: Option<PathBuf>,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the full invariant suite; exits 1 if any check fails.
    Verify {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, default_value_t = 12)]
        degree: u32,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let tol = args::Tolerances::new(&cli.tol);
    match commands::dispatch(cli.command, &tol) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
