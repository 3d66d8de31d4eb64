use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

mod commands;
mod scenario;

use scenario::Scenario;

/// Batch runner for p-parabolicity and divergence-theorem scenarios.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one scenario file and write its report.
    Run {
        scenario: PathBuf,
        /// Tolerance override: capacity bound consistency or ladder agreement.
        #[arg(long)]
        tol: Option<f64>,
        /// Directory for relative output paths (default: the scenario's directory).
        #[arg(long, env = "PARASTOKES_OUT")]
        out: Option<PathBuf>,
    },
}

/// 0 clean, 1 inconclusive, 2 invalid input or I/O failure.
fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Cmd::Run { scenario, tol, out } => match run(&scenario, tol, out) {
            Ok(0) => ExitCode::SUCCESS,
            Ok(n) => ExitCode::from(n),
            Err(err) => {
                eprintln!("error: {err:#}");
                ExitCode::from(2)
            }
        },
    }
}

fn run(file: &std::path::Path, tol: Option<f64>, out: Option<PathBuf>) -> Result<u8> {
    if let Some(t) = tol {
        anyhow::ensure!(t > 0.0 && t.is_finite(), "--tol must be positive and finite, got {t}");
    }
    let scn = Scenario::load(file, out.as_deref())?;
    let outcome = commands::run(&scn, tol)?;
    if let Some(dir) = scn.output.parent() {
        std::fs::create_dir_all(dir).with_context(|| format!("{}: cannot create directory", dir.display()))?;
    }
    std::fs::write(&scn.output, &outcome.text).with_context(|| format!("{}: cannot write", scn.output.display()))?;
    eprintln!("wrote {}", scn.output.display());
    if outcome.inconclusive.is_empty() {
        return Ok(0);
    }
    for reason in &outcome.inconclusive {
        eprintln!("inconclusive: {reason}");
    }
    Ok(1)
}
