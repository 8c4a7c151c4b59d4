//! Experiment driver for the STNP solvers: JSON configs in, CSV tables out.
//!
//! Every subcommand writes into one output directory. Each CSV has a header row and a
//! `<file>.json` sidecar with the config hash, the crate version and the seed.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::{Path, PathBuf};

pub use config::RunConfig;
pub use error::CliError;

use output::{Meta, Output};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Convergence,
    Compare,
    Fbenn,
    OracleCache,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Convergence => "convergence",
            Command::Compare => "compare",
            Command::Fbenn => "fbenn",
            Command::OracleCache => "oracle-cache",
        }
    }
}

/// Resolve the seed override and output directory, then open the output.
pub fn prepare(cmd: Command, mut cfg: RunConfig, seed: Option<u64>, out: Option<&Path>) -> Result<(RunConfig, Output), CliError> {
    if let Some(s) = seed {
        cfg.ansatz.seed = s;
    }
    let dir = out.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from(&cfg.output.directory));
    let meta = Meta {
        command: cmd.name().into(),
        config_hash: cfg.hash(),
        version: env!("CARGO_PKG_VERSION").into(),
        seed: cfg.ansatz.seed,
    };
    let output = Output::create(&dir, meta)?;
    output.write_json("config.json", &cfg)?;
    Ok((cfg, output))
}

/// Load the config at `path` and run `cmd`.
pub fn execute(cmd: Command, path: &Path, seed: Option<u64>, out: Option<&Path>) -> Result<(), CliError> {
    let cfg = RunConfig::load(path)?;
    cfg.check()?;
    let (cfg, output) = prepare(cmd, cfg, seed, out)?;
    match cmd {
        Command::Solve => commands::cmd_solve(&cfg, &output).map(drop),
        Command::Convergence => commands::cmd_convergence(&cfg, &output).map(drop),
        Command::Compare => commands::cmd_compare(&cfg, &output).map(drop),
        Command::Fbenn => commands::cmd_fbenn(&cfg, &output).map(drop),
        Command::OracleCache => commands::cmd_oracle_cache(&cfg, &output).map(|d| {
            println!("{}", d.path.display());
        }),
    }
}
