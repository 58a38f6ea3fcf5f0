//! `ts-cache-sim`: experiment harness for the timing-speculation cache
//! simulator.
//!
//! Exit codes: 0 success, 2 configuration error, 3 trace ingestion error,
//! 4 internal invariant violation.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ts_cache_sim::commands;
use ts_cache_sim::config::ExperimentConfig;
use ts_cache_sim::{Artifact, CliError, EXIT_INGESTION};

#[derive(Parser)]
#[command(
    name = "ts-cache-sim",
    about = "SRAM timing-speculation cache simulator",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON experiment config layered over the embedded defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed (the TS_SIM_SEED environment variable overrides this).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Monte-Carlo trials per sweep point.
    #[arg(long, global = true)]
    trials: Option<u64>,

    /// Output directory for CSV/SVG artifacts.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Bit/word error rates versus bitline discharge time.
    BerSweep,
    /// Trace-driven throughput gain at each configured supply voltage.
    Throughput,
    /// Normalized EDP comparison of the fault-tolerance schemes.
    Compare,
    /// Figure-of-merit table for the timing-speculation SRAM designs.
    Fom,
    /// Run a trace file through the cache model.
    Trace {
        /// Trace file: `R <hex-addr>` or `W <hex-addr> <hex-data>` per line.
        trace_file: PathBuf,
    },
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.master_seed = seed;
    }
    if let Ok(env_seed) = std::env::var("TS_SIM_SEED") {
        cfg.master_seed = env_seed
            .parse()
            .map_err(|e| CliError::config(format!("TS_SIM_SEED {env_seed:?}: {e}")))?;
    }
    if let Some(trials) = cli.trials {
        cfg.trials = trials;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_artifacts(out: &PathBuf, artifacts: &[Artifact]) -> Result<(), CliError> {
    std::fs::create_dir_all(out)
        .map_err(|e| CliError::config(format!("cannot create {}: {e}", out.display())))?;
    for a in artifacts {
        let path = out.join(&a.name);
        std::fs::write(&path, &a.bytes)
            .map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display())))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = load_config(cli)?;
    let artifacts = match &cli.command {
        Command::BerSweep => commands::cmd_ber_sweep(&cfg)?,
        Command::Throughput => commands::cmd_throughput(&cfg)?,
        Command::Compare => commands::cmd_compare(&cfg)?,
        Command::Fom => commands::cmd_fom(&cfg)?,
        Command::Trace { trace_file } => {
            let text = std::fs::read_to_string(trace_file).map_err(|e| CliError {
                exit_code: EXIT_INGESTION,
                message: format!("cannot read {}: {e}", trace_file.display()),
            })?;
            commands::cmd_trace(&cfg, &text)?
        }
    };
    write_artifacts(&cli.out, &artifacts)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e.exit_code {
                c @ 2..=4 => c,
                _ => 2,
            };
            ExitCode::from(code as u8)
        }
    }
}
