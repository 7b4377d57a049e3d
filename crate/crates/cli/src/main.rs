use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use fourier_topo_cli::config::load_config;
use fourier_topo_cli::report::{align, report};
use fourier_topo_cli::runner::{describe, run_experiment};
use fourier_topo_cli::sweep::{parse_axis, run_sweep};

/// Topology optimization with a Fourier-projected neural density field.
///
/// Exit status: 0 converged, 2 stopped at the iteration limit, 1 error.
#[derive(Parser)]
#[command(name = "fourier-topo", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override a key, e.g. `--set projection.l_max=20`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        sets: Vec<String>,
    },
    /// Run one configuration per value of a key, then write summary.csv.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// `key=v1,v2,...`
        #[arg(long)]
        axis: String,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        sets: Vec<String>,
    },
    /// Summarize a run or sweep directory.
    Report { dir: PathBuf },
}

/// Writes to stdout, ignoring a reader that went away (`| head`).
fn out(text: &str) {
    let _ = std::io::stdout().write_all(text.as_bytes());
}

fn execute(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Run { config, sets } => {
            let loaded = load_config(&config, &sets)?;
            for w in &loaded.warnings {
                eprintln!("warning: {w}");
            }
            let summary = run_experiment(&loaded.config)?;
            out(&format!("{}\n", describe(&summary)));
            Ok(summary.exit_code() as u8)
        }
        Command::Sweep { config, axis, sets } => {
            let axis = parse_axis(&axis)?;
            let text = std::fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
            let loaded = fourier_topo_cli::config::parse_config(&text, &sets)?;
            for w in &loaded.warnings {
                eprintln!("warning: {w}");
            }
            let result = run_sweep(&text, &sets, &axis)?;
            out(&align(&std::fs::read_to_string(&result.summary)?));
            out(&format!("summary in {}\n", result.summary.display()));
            Ok(result.exit_code() as u8)
        }
        Command::Report { dir } => {
            out(&report(&dir)?);
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
