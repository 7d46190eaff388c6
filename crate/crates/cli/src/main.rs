use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hb_cli::{run_file, Overrides, Task};

/// Spectra, phase scans, critical points and Fisher information of
/// quadratic bosonic Hamiltonians.
#[derive(Parser)]
#[command(name = "hbmat", version, allow_negative_numbers = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for scans.
    #[arg(long, global = true)]
    parallel: Option<usize>,
    /// Seed for inverse-iteration start vectors.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Relative threshold on |Im E| for the superradiant label.
    #[arg(long, global = true)]
    tol_im: Option<f64>,
    /// QR iteration cap per matrix row.
    #[arg(long, global = true)]
    max_sweeps: Option<usize>,
    /// Skip diagonal balancing.
    #[arg(long, global = true)]
    no_balance: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Run the task named in the configuration.
    Run,
    /// Eigenvalues, ±E pairs and branch labels.
    Spectrum,
    /// Sampled phase labels and indicators along the configured path.
    PhaseScan,
    /// Refined exceptional and degenerate points and the phase sequence.
    Critical,
    /// Fisher information of the ground state.
    Qfi,
    /// Oracle suite and published-claim report.
    Check,
    /// HB matrix entries.
    DumpMatrix,
}

impl Command {
    fn task(self) -> Option<Task> {
        match self {
            Command::Run => None,
            Command::Spectrum => Some(Task::Spectrum),
            Command::PhaseScan => Some(Task::PhaseScan),
            Command::Critical => Some(Task::Critical),
            Command::Qfi => Some(Task::Qfi),
            Command::Check => Some(Task::Check),
            Command::DumpMatrix => Some(Task::DumpMatrix),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let Some(config) = cli.config else {
        eprintln!("error: --config <file> is required");
        return ExitCode::from(1);
    };
    let overrides = Overrides {
        out: cli.out,
        parallel: cli.parallel,
        seed: cli.seed,
        tol_im: cli.tol_im,
        max_sweeps: cli.max_sweeps,
        no_balance: cli.no_balance,
    };
    match run_file(&config, cli.command.task(), &overrides) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
