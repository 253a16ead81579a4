use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pfaffnet_core::BracketMode;
use serde::de::DeserializeOwned;

mod commands;
mod config;
mod report;

use config::*;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags, malformed config or invalid parameters.
    #[error("{0}")]
    Schema(String),
    #[error(transparent)]
    Core(#[from] pfaffnet_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_domain() => 3,
            _ => 2,
        }
    }
}

/// Pfaffian complexity toolkit for Riccati-activation networks.
#[derive(Debug, Parser)]
#[command(name = "pfaffnet", version, about)]
struct Cli {
    /// JSON config for the subcommand; flags override its fields.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Single seed.
    #[arg(long, global = true, value_name = "N", conflicts_with = "seeds")]
    seed: Option<u64>,
    /// Seed range `N..M`, `N..=M` or list `a,b,c`.
    #[arg(long, global = true, value_name = "N..M")]
    seeds: Option<String>,
    /// Write the CSV here and the JSON sidecar next to it.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// Bracket set: `hall` or `all-trees`.
    #[arg(long, global = true)]
    mode: Option<BracketMode>,
    /// Grid cells per axis.
    #[arg(long, global = true, value_name = "N")]
    resolution: Option<usize>,
    /// Numerical tolerance.
    #[arg(long, global = true, value_name = "X")]
    tol: Option<f64>,
    /// Minor threshold for the minor criterion.
    #[arg(long, global = true, value_name = "X")]
    epsilon: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Pfaffian format (d, R, α, β) of an architecture.
    Format,
    /// Exact complexity bounds.
    Bound,
    /// Derive and numerically verify chain certificates.
    VerifyChain,
    /// Count zeros of one-dimensional networks.
    Zeros,
    /// Betti numbers of superlevel sets.
    Betti,
    /// Sample rank-drop loci of bracket matrices.
    Rankdrop,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Format => "format",
            Command::Bound => "bound",
            Command::VerifyChain => "verify-chain",
            Command::Zeros => "zeros",
            Command::Betti => "betti",
            Command::Rankdrop => "rankdrop",
        }
    }

    fn accepts(self, flag: &str) -> bool {
        let allowed: &[&str] = match self {
            Command::Format => &[],
            Command::Bound => &["mode"],
            Command::VerifyChain | Command::Zeros => &["seed", "seeds", "tol"],
            Command::Betti => &["seed", "seeds", "resolution"],
            Command::Rankdrop => &["seed", "seeds", "mode", "resolution", "tol", "epsilon"],
        };
        allowed.contains(&flag)
    }
}

impl Cli {
    fn check_flags(&self) -> Result<(), CliError> {
        let given = [
            ("seed", self.seed.is_some()),
            ("seeds", self.seeds.is_some()),
            ("mode", self.mode.is_some()),
            ("resolution", self.resolution.is_some()),
            ("tol", self.tol.is_some()),
            ("epsilon", self.epsilon.is_some()),
        ];
        for (flag, present) in given {
            if present && !self.command.accepts(flag) {
                return Err(CliError::Schema(format!(
                    "--{flag} does not apply to `{}`",
                    self.command.name()
                )));
            }
        }
        Ok(())
    }

    fn seeds_override(&self) -> Option<String> {
        self.seed.map(|s| s.to_string()).or_else(|| self.seeds.clone())
    }
}

fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, CliError> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text =
                std::fs::read_to_string(p).map_err(|e| CliError::Schema(format!("config {}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| CliError::Schema(format!("config {}: {e}", p.display())))
        }
    }
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    cli.check_flags()?;
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Schema("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Schema(format!("thread pool: {e}")))?;
    }
    let cfg_path = cli.config.as_deref();
    let seeds = cli.seeds_override();
    let report = match cli.command {
        Command::Format => commands::format(&load::<FormatConfig>(cfg_path)?)?,
        Command::Bound => {
            let mut c: BoundConfig = load(cfg_path)?;
            if let Some(m) = cli.mode {
                c.mode = m;
            }
            commands::bound(&c)?
        }
        Command::VerifyChain => {
            let mut c: VerifyConfig = load(cfg_path)?;
            if let Some(s) = seeds {
                c.seeds = s;
            }
            if let Some(t) = cli.tol {
                c.tol = t;
            }
            commands::verify_chain_cmd(&c)?
        }
        Command::Zeros => {
            let mut c: ZerosConfig = load(cfg_path)?;
            if let Some(s) = seeds {
                c.seeds = s;
            }
            if let Some(t) = cli.tol {
                c.tol = t;
            }
            commands::zeros(&c)?
        }
        Command::Betti => {
            let mut c: BettiConfig = load(cfg_path)?;
            if let Some(s) = seeds {
                c.seeds = s;
            }
            if let Some(r) = cli.resolution {
                c.resolution = r;
            }
            commands::betti(&c)?
        }
        Command::Rankdrop => {
            let mut c: RankdropConfig = load(cfg_path)?;
            if let Some(s) = seeds {
                c.seeds = s;
            }
            if let Some(m) = cli.mode {
                c.mode = m;
            }
            if let Some(r) = cli.resolution {
                c.resolution = r;
            }
            if let Some(t) = cli.tol {
                c.tol = t;
            }
            if let Some(e) = cli.epsilon {
                c.epsilon = Some(e);
            }
            commands::rankdrop(&c, cli.out.as_deref())?
        }
    };
    report.emit(cli.out.as_deref())?;
    Ok(report.conformant)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("pfaffnet: {} run is nonconformant", cli.command.name());
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("pfaffnet: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
