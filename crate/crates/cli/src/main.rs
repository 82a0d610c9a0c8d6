//! Command-line driver for the QFI control workbench.

use anyhow::Result;
use clap::{Parser, Subcommand};
use qfi_control_cli::commands::{self, CommonArgs};
use std::path::PathBuf;

const CSV_HELP: &str = "\
Output CSV schemas:
  baseline.csv        t, f, f_over_t
  learning_curve.csv  epoch, worker, f_over_t, wall_clock_s
  grape_history.csv   iteration, f, f_over_t
  sweep.csv           omega0, method, f_over_t
  average.csv         delta_omega, method, avg_f_over_t

Every run also writes run_manifest.json (resolved config + seed + versions)
beside its outputs. In --deterministic mode (single worker), outputs are
byte-for-byte reproducible from the manifest; wall clocks are written as 0.";

#[derive(Parser)]
#[command(
    name = "qfi-control",
    version,
    about = "Find and evaluate control pulses maximizing the quantum Fisher information of a qubit frequency estimate",
    after_help = CSV_HELP
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Config file (TOML; see the repository README for the schema)
    #[arg(long, global = true, default_value = "qfi.toml")]
    config: PathBuf,

    /// Output directory for CSVs, checkpoints, and the run manifest
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Master random seed
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Number of parallel training workers (train only)
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Single-worker deterministic mode with zeroed wall clocks
    #[arg(long, global = true)]
    deterministic: bool,

    /// Stochastic rollouts per evaluation point (evaluate, sweep)
    #[arg(long, global = true)]
    trials: Option<usize>,

    /// Number of frequency grid points (sweep)
    #[arg(long, global = true)]
    grid: Option<usize>,

    /// Averaging half-width Δω; repeatable (average)
    #[arg(long = "delta-omega", global = true)]
    delta_omega: Vec<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// No-control QFI baseline F0(t) over the scenario's time grid
    Baseline,
    /// Gradient-ascent pulse engineering at the scenario's omega0
    Grape,
    /// Train the actor-critic controller (A3C or A3C+PPO)
    Train,
    /// Roll a trained policy out and keep the best schedule
    Evaluate,
    /// F(T)/T versus omega0 for no-control / fixed-pulse / policy methods
    Sweep,
    /// Window-averaged F(T)/T from a sweep CSV
    Average,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let args = CommonArgs {
        config: cli.config,
        out: cli.out,
        seed: cli.seed,
        workers: cli.workers,
        deterministic: cli.deterministic,
        trials: cli.trials,
        grid: cli.grid,
        delta_omega: cli.delta_omega,
    };
    match cli.command {
        Command::Baseline => commands::baseline_cmd(&args),
        Command::Grape => commands::grape_cmd(&args),
        Command::Train => commands::train_cmd(&args),
        Command::Evaluate => commands::evaluate_cmd(&args),
        Command::Sweep => commands::sweep_cmd(&args),
        Command::Average => commands::average_cmd(&args),
    }
}
