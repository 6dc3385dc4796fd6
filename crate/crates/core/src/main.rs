use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use qloss::cli::{cmd_measure, cmd_run, cmd_validate, ModelArgs, RunConfig};

/// Quantum loss of a Bell system–ancilla pair under qubit channels.
#[derive(Debug, Parser)]
#[command(name = "qloss", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample the trajectory, write the CSV and the JSON report.
    Run {
        #[command(flatten)]
        model: ModelArgs,
        /// Trajectory CSV path.
        #[arg(long, default_value = qloss::cli::DEFAULT_CSV_PATH)]
        out: PathBuf,
        /// JSON report path.
        #[arg(long, default_value = qloss::cli::DEFAULT_REPORT_PATH)]
        report: PathBuf,
    },
    /// Print the JSON report to stdout.
    Measure {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Cross-check closed forms, identities and verdicts.
    Validate {
        /// Integrator step for the closed-form comparison.
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
    },
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn real_main() -> anyhow::Result<ExitCode> {
    match Cli::parse().command {
        Command::Run { model, out, report } => {
            let mut config = RunConfig::from_args(&model)?;
            config.out = Some(out.clone());
            config.report = Some(report.clone());
            let json = cmd_run(&config)?;
            println!(
                "wrote {} and {}: measure {:.6}, {} interval(s), analytic verdict {}",
                out.display(),
                report.display(),
                json.measure,
                json.intervals.len(),
                json.analytic_verdict
            );
        }
        Command::Measure { model } => {
            let config = RunConfig::from_args(&model)?;
            let json = cmd_measure(&config)?;
            println!("{}", serde_json::to_string_pretty(&json).context("serializing report")?);
        }
        Command::Validate { step } => {
            anyhow::ensure!(step > 0.0 && step.is_finite(), "--step must be > 0, got {step}");
            let checks = cmd_validate(step);
            for c in &checks {
                println!("[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            println!("{} checks, {} failed", checks.len(), failed);
            if failed > 0 {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
