//! Command-line front end: fidelity sweeps, pulse optimization, pulse
//! inspection, and trajectory dumps.
//!
//! All quantities are dimensionless with `hbar = a_max = 1`: times (tau_c,
//! horizon, operation time) in units of `hbar/a_max`, energies (delta,
//! amplitudes) in units of `a_max`.
//!
//! Exit codes: 0 success, 2 bad arguments or malformed input, 3 I/O error.

mod commands;
mod manifest;

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "qflip",
    version,
    about = "One-qubit control under random telegraph noise",
    after_help = "Units are dimensionless with hbar = a_max = 1: times (tau_c, horizon, \
                  operation time) in hbar/a_max, energies (delta, amplitudes) in a_max."
)]
struct Cli {
    /// Worker threads for the Monte Carlo loops. Never affects results.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a pulse's fidelity over a grid of noise parameters (CSV out).
    FidelitySweep(SweepArgs),
    /// Optimize a bounded control pulse by gradient ascent.
    Optimize(OptimizeArgs),
    /// Report the noiseless action of a pulse.
    GateCheck(GateCheckArgs),
    /// Dump sampled noise trajectories (CSV out).
    TrajectorySample(TrajectoryArgs),
}

/// Which operation a pulse is scored against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum TargetKind {
    /// State transfer from the south to the north pole of the Bloch sphere.
    Bitflip,
    /// The NOT gate, averaged over all pure initial states.
    Notgate,
}

#[derive(clap::Args)]
struct SweepArgs {
    /// Built-in pulse name (pi, corpse, scorpse) or a pulse file path.
    #[arg(long)]
    pulse: String,
    #[arg(long, value_enum, default_value = "bitflip")]
    kind: TargetKind,
    /// Noise correlation times, comma separated (units of hbar/a_max).
    #[arg(long, value_delimiter = ',', required = true)]
    tauc: Vec<f64>,
    /// Noise strengths, comma separated (units of a_max).
    #[arg(long, value_delimiter = ',', required = true)]
    delta: Vec<f64>,
    /// Trajectories per grid point.
    #[arg(long, default_value_t = 100_000)]
    ntraj: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "sweep.csv")]
    out: PathBuf,
}

#[derive(clap::Args)]
struct OptimizeArgs {
    #[arg(long, value_enum)]
    target: TargetKind,
    /// Noise correlation time (units of hbar/a_max).
    #[arg(long)]
    tauc: f64,
    /// Noise strength (units of a_max).
    #[arg(long)]
    delta: f64,
    /// Operation times to optimize, comma separated. With several values the
    /// best time is searched and a per-time summary is written.
    #[arg(long, value_delimiter = ',', required = true)]
    time: Vec<f64>,
    /// Trajectories in the fixed training batch.
    #[arg(long, default_value_t = 1000)]
    batch: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Extra uncorrelated starting fields per operation time.
    #[arg(long, default_value_t = 2)]
    restarts: usize,
    /// Grid intervals per pulse; defaults to one interval per pi/30 of time.
    #[arg(long)]
    segments: Option<usize>,
    #[arg(long, default_value_t = 2000)]
    max_iter: usize,
    /// Stop when this improvement is not exceeded for ten accepted steps.
    #[arg(long, default_value_t = 1e-7)]
    tolerance: f64,
    /// Draw a fresh trajectory batch every iteration.
    #[arg(long, default_value_t = false)]
    resample_noise: bool,
    #[arg(long, default_value = "grape-out")]
    out_dir: PathBuf,
}

#[derive(clap::Args)]
struct GateCheckArgs {
    /// Built-in pulse name (pi, corpse, scorpse) or a pulse file path.
    #[arg(long)]
    pulse: String,
}

#[derive(clap::Args)]
struct TrajectoryArgs {
    /// Noise correlation time (units of hbar/a_max).
    #[arg(long)]
    tauc: f64,
    /// Noise strength; only scales amplitudes, never the jump times.
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    /// Sampling horizon (units of hbar/a_max).
    #[arg(long)]
    horizon: f64,
    /// Number of trajectories.
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "trajectories.csv")]
    out: PathBuf,
}

/// Failures after argument parsing, mapped onto exit codes.
enum CliError {
    /// Invalid input: unknown pulse, malformed file, bad grid. Exit 2.
    Usage(String),
    /// Filesystem trouble. Exit 3.
    Io(String),
}

impl From<qflip_core::Error> for CliError {
    fn from(e: qflip_core::Error) -> Self {
        match e {
            qflip_core::Error::Io(inner) => CliError::Io(inner.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        // Thread count is a performance knob only; reductions are order-fixed.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    let result = match &cli.command {
        Command::FidelitySweep(args) => commands::fidelity_sweep(args),
        Command::Optimize(args) => commands::optimize(args),
        Command::GateCheck(args) => commands::gate_check(args),
        Command::TrajectorySample(args) => commands::trajectory_sample(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
        Err(CliError::Io(message)) => {
            eprintln!("I/O error: {message}");
            ExitCode::from(3)
        }
    }
}
