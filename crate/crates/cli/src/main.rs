//! Experiment driver for sparse pseudospectral approximation.
//!
//! Subcommands: `approximate` (one construction, expansion JSON + summary
//! CSV), `convergence` (error/indicator rows per checkpoint or level),
//! `genz-suite` (batch Genz benchmark runs), `aliasing-report` (pairwise
//! aliasing diagnostics). Exit codes: 0 success, 2 configuration error,
//! 3 model failure.

use clap::{Parser, Subcommand};
use smolyak_ps_cli::{config, output, runner, CliError};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "smolyak-ps", version, about = "Sparse pseudospectral approximation runner")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Path to the JSON run configuration.
    #[arg(long, global = true, default_value = "config.json")]
    config: PathBuf,

    /// Output directory (also settable via SMOLYAK_PS_OUT; flag wins).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Maximum concurrent model evaluations for in-process models.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,

    /// Evaluation cache file: restored before the run, saved after.
    #[arg(long, global = true)]
    cache: Option<PathBuf>,

    /// Override the configuration's model-sampling seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the configured construction once.
    Approximate,
    /// Emit error/indicator rows per adaptive checkpoint or per level.
    Convergence,
    /// Run a batch of seeded Genz instances (adaptive, optionally with a
    /// non-adaptive sweep for comparison).
    GenzSuite,
    /// Report the aliasing pairs of a basis/rule combination.
    AliasingReport,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out_dir = cli
        .out
        .clone()
        .or_else(|| std::env::var_os("SMOLYAK_PS_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));

    let result = (|| -> Result<(), CliError> {
        let raw = std::fs::read_to_string(&cli.config)
            .map_err(|e| CliError::config(format!("{}: {e}", cli.config.display())))?;
        let cfg = config::RunConfig::parse(&raw)?;
        let ctx = runner::Context {
            out_dir,
            jobs: cli.jobs.max(1),
            cache_path: cli.cache.clone(),
            seed_override: cli.seed,
            config_hash: output::config_hash(&raw),
        };
        match cli.command {
            Cmd::Approximate => runner::approximate(&cfg, &ctx),
            Cmd::Convergence => runner::convergence(&cfg, &ctx),
            Cmd::GenzSuite => runner::genz_suite(&cfg, &ctx),
            Cmd::AliasingReport => runner::aliasing_report(&cfg, &ctx),
        }
    })();

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{err}");
            ExitCode::from(err.exit_code())
        }
    }
}
