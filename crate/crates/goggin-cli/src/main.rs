//! `goggin`: experiments for score-corrected filtering of the scaled AR(1)
//! model. Subcommands wrap the library modules one-to-one; every run writes
//! its outputs plus a `manifest.json` tying them to the canonicalized
//! parameters and master seed.
//!
//! Exit codes: 0 success, 2 configuration/usage error, 3 ordering-invariant
//! violation, 4 numeric failure.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "goggin", version, about = "Filtering experiments for the scaled AR(1) observation model")]
pub struct Cli {
    /// Experiment config file (TOML or JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed (overrides the config file's seed; default 0).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: machine parallelism).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output directory, created if missing (default: current directory).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Simulate one trajectory and write it as t,x,y CSV.
    Simulate {
        /// System size N (> 1).
        #[arg(long)]
        n: f64,
        /// Observation noise scale s (> 0).
        #[arg(long)]
        s: f64,
        /// Number of transitions.
        #[arg(long)]
        horizon: usize,
        /// Initial state.
        #[arg(long, default_value_t = 0.0)]
        x0: f64,
        /// Signal noise family (e.g. `gaussian`, `logistic`, `student_t:5`).
        #[arg(long, default_value = "gaussian")]
        signal: String,
        /// Observation noise family.
        #[arg(long, default_value = "gaussian")]
        obs: String,
    },
    /// Race the configured filters (and optional oracle) on a shared
    /// trajectory set; emit the comparison CSV and a JSON verdict.
    Compare,
    /// Closed-form information bounds and the Kalman suboptimality gap.
    Crlb {
        #[arg(long)]
        n: f64,
        #[arg(long)]
        s: f64,
        /// Batch length: an integer, or `auto` for round(s).
        #[arg(long, default_value = "auto")]
        tau: String,
        #[arg(long, default_value = "gaussian")]
        signal: String,
        #[arg(long, default_value = "gaussian")]
        obs: String,
    },
    /// How fast batch-weighted noise sums become Gaussian in Fisher
    /// information (FFT density engine).
    FisherClt {
        /// Noise family shorthand (e.g. `logistic`, `student_t:5`).
        #[arg(long)]
        model: String,
        /// Comma-separated, strictly increasing batch lengths.
        #[arg(long, default_value = "4,8,16,32,64")]
        taus: String,
        /// System size N used for the batch weights.
        #[arg(long, default_value_t = 1e6)]
        n: f64,
        /// FFT grid size (power of two).
        #[arg(long, default_value_t = 1 << 14)]
        points: usize,
    },
    /// Closed-form regime map over an (N, s/sqrt(N)) grid.
    Regimes {
        #[arg(long, default_value = "gaussian")]
        signal: String,
        #[arg(long, default_value = "logistic")]
        obs: String,
        /// Comma-separated N values (default 1e3,1e4,1e5,1e6).
        #[arg(long)]
        n_list: Option<String>,
        /// Comma-separated s/sqrt(N) ratios (default: 11 points, 1e-3..1e2).
        #[arg(long)]
        ratios: Option<String>,
    },
    /// Monte Carlo rate fits across N: stationary bias decay or the gap
    /// between filter MSE and the batched information bound.
    Rates {
        /// `bias` or `gap`.
        #[arg(long)]
        kind: String,
        /// Filter to measure.
        #[arg(long, default_value = "gf")]
        filter: String,
        /// How s scales with N: `sqrt_n`, `n_quarter`, or `fixed:<s>`.
        #[arg(long, default_value = "sqrt_n")]
        s_rule: String,
        /// Comma-separated, strictly increasing N values (>= 3).
        #[arg(long, default_value = "1e3,1e4,1e5")]
        n_list: String,
        #[arg(long, default_value_t = 10)]
        replications: usize,
        #[arg(long, default_value_t = 200_000)]
        horizon: usize,
        /// Default: 20·ceil(s·sqrt(N)) per point.
        #[arg(long)]
        burn_in: Option<usize>,
        #[arg(long, default_value = "gaussian")]
        signal: String,
        #[arg(long, default_value = "logistic")]
        obs: String,
        /// `recursive` or `stationary`.
        #[arg(long, default_value = "recursive")]
        gain_mode: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: could not size the worker pool: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &goggin::Error) -> ExitCode {
    use goggin::Error;
    match e {
        Error::Validation(_) | Error::Config(_) | Error::Io(_) => ExitCode::from(2),
        Error::Numeric(_) | Error::Degeneracy { .. } | Error::UnreliableOracle { .. } => {
            ExitCode::from(4)
        }
    }
}
