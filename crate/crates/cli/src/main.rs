use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use stnp_cli::{execute, Command};

#[derive(Parser)]
#[command(name = "stnp", version, about = "Sequential-in-time neural solvers for fractional Burgers equations")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides `ansatz.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory; overrides `output.directory`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// One STNP run with snapshots, diagnostics and checkpoints.
    Solve,
    /// Error table of the manufactured problem over N, GL order and depth.
    Convergence,
    /// STNP against central-difference and upwind grid solvers.
    Compare,
    /// STNP on FBENN against the Hopf-Cole solution.
    Fbenn,
    /// Compute the Hopf-Cole oracle for a config and store it.
    OracleCache,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let cmd = match cli.command {
        Cmd::Solve => Command::Solve,
        Cmd::Convergence => Command::Convergence,
        Cmd::Compare => Command::Compare,
        Cmd::Fbenn => Command::Fbenn,
        Cmd::OracleCache => Command::OracleCache,
    };
    if let Some(n) = cli.threads {
        set_threads(n);
    }
    let Some(config) = cli.config else {
        eprintln!("error: --config PATH is required");
        return ExitCode::from(2);
    };
    match execute(cmd, &config, cli.seed, cli.out.as_deref()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

#[cfg(feature = "parallel")]
fn set_threads(n: usize) {
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
        log::warn!("could not set the thread count: {e}");
    }
}

#[cfg(not(feature = "parallel"))]
fn set_threads(n: usize) {
    if n != 1 {
        log::warn!("built without the parallel feature; --threads {n} ignored");
    }
}
