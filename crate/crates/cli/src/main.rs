mod commands;

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(
    name = "qjump",
    version,
    about = "Quantum-jump simulation of a phase qubit coupled to a two-level defect"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Full,
    FastRate,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate a switching-current trajectory from a configuration file.
    Simulate {
        config: PathBuf,
        /// Master seed (defaults to the configuration's).
        #[arg(long)]
        seed: Option<u64>,
        /// Number of sweeps (defaults to the configuration's).
        #[arg(long)]
        sweeps: Option<usize>,
        /// Override the configured simulation mode.
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Worker threads; defaults to $QJUMP_WORKERS, then all cores.
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, default_value = "trajectory.csv")]
        out: PathBuf,
    },
    /// Classify, binarize and fit a trajectory file.
    Analyze {
        trajectory: PathBuf,
        /// Requested band count (2 or 3).
        #[arg(long, default_value_t = 3)]
        bands: usize,
        /// Poisson counting window in seconds.
        #[arg(long, default_value_t = 6.0)]
        window: f64,
        /// Directory for report.txt and CSV tables.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic two-state telegraph mapped onto band currents.
    Synth {
        /// Rate of leaving `on`, 1/s.
        #[arg(long)]
        ron: f64,
        /// Rate of leaving `off`, 1/s.
        #[arg(long)]
        roff: f64,
        /// Sweep rate, Hz.
        #[arg(long, default_value_t = 100.0)]
        rate: f64,
        /// Record length, seconds.
        #[arg(long, default_value_t = 10_000.0)]
        duration: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Probability that an `on` sample falls in the middle band.
        #[arg(long, default_value_t = 0.5)]
        middle: f64,
        /// Current noise, nA.
        #[arg(long, default_value_t = 5.0)]
        noise_na: f64,
        #[arg(long, default_value = "synthetic.csv")]
        out: PathBuf,
    },
    /// Dressed qubit/TLS branches across a bias grid.
    Spectroscopy {
        config: PathBuf,
        /// START:END:POINTS with currents in uA; defaults to a window
        /// around the crossing.
        #[arg(long)]
        grid: Option<String>,
        #[arg(long, default_value = "spectroscopy.csv")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Simulate {
            config,
            seed,
            sweeps,
            mode,
            workers,
            out,
        } => commands::simulate(&config, seed, sweeps, mode.map(|m| matches!(m, ModeArg::FastRate)), workers, &out),
        Command::Analyze {
            trajectory,
            bands,
            window,
            out,
        } => commands::analyze(&trajectory, bands, window, out.as_deref()),
        Command::Synth {
            ron,
            roff,
            rate,
            duration,
            seed,
            middle,
            noise_na,
            out,
        } => commands::synth(ron, roff, rate, duration, seed, middle, noise_na, &out),
        Command::Spectroscopy { config, grid, out } => {
            commands::spectroscopy(&config, grid.as_deref(), &out)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
