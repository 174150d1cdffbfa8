use std::path::PathBuf;
use std::process::ExitCode;

use boussinesq_core::config::RunConfig;
use boussinesq_core::Error;
use clap::{Parser, Subcommand};

mod report;
mod run;

#[derive(Parser, Debug)]
#[command(name = "boussinesq", version, about = "Variable-viscosity Boussinesq solver and operator probes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run manifest; defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the manifest seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Picard iteration with norm ledgers and snapshots.
    Simulate,
    /// Single-mode oracles, harmonic identities and operator probes.
    VerifyOps,
    /// Heat/dyadic norm equivalence over a seeded corpus.
    Besov,
    /// Epsilon sweep or horizontal data-scale sweep.
    Sweep,
    /// Aggregates ledgers under the output directory and emits a gnuplot script.
    Report,
    /// Prints the resolved manifest.
    Config,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::VerifyOps => "verify-ops",
            Command::Besov => "besov",
            Command::Sweep => "sweep",
            Command::Report => "report",
            Command::Config => "config",
        }
    }
}

/// Exit codes: 0 ok or diverged, 1 invalid input, 2 invariant violation.
pub enum Failure {
    Invalid(String),
    Invariant(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::MaximumPrinciple { .. } | Error::Divergence(_) | Error::NonFinite(_) => Failure::Invariant(e.to_string()),
            Error::Inadmissible(_) | Error::InvalidArgument(_) | Error::InvalidGrid(_) | Error::Format(_) => {
                Failure::Invalid(e.to_string())
            }
            other => Failure::Invariant(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

fn load(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Failure::Invalid(format!("{}: {e}", p.display())))?;
            RunConfig::from_json(&text).map_err(|e| Failure::Invalid(format!("{}: {e}", p.display())))?
        }
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .filter_level(if cli.quiet { log::LevelFilter::Warn } else { log::LevelFilter::Info })
        .parse_default_env()
        .format_timestamp(None)
        .init();
    let outcome = load(&cli).and_then(|cfg| {
        let problems = cfg.problems();
        if !problems.is_empty() {
            return Err(Failure::Invalid(format!("invalid configuration:\n  {}", problems.join("\n  "))));
        }
        let out = cli
            .out
            .clone()
            .or_else(|| cfg.output.clone())
            .unwrap_or_else(|| PathBuf::from("out").join(cli.command.name()));
        match cli.command {
            Command::Simulate => run::simulate(&cfg, &out),
            Command::VerifyOps => run::verify_ops(&cfg, &out),
            Command::Besov => run::besov(&cfg, &out),
            Command::Sweep => run::sweep(&cfg, &out),
            Command::Report => report::report(&out),
            Command::Config => {
                println!("{}", cfg.to_json());
                Ok(())
            }
        }
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Invariant(m)) => {
            eprintln!("invariant violated: {m}");
            ExitCode::from(2)
        }
    }
}
