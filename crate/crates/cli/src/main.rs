use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::error::ErrorKind;
use clap::Parser;

use ncmontel_cli::config::{ExperimentConfig, FileConfig, Overrides, Scenario};
use ncmontel_cli::{output, scenarios};

/// Run a named experiment and write report.json and trace.csv.
#[derive(Debug, Parser)]
#[command(name = "ncmontel", version)]
struct Cli {
    scenario: Scenario,

    /// JSON config file; any field may be omitted.
    #[arg(long)]
    config: Option<PathBuf>,

    #[arg(long)]
    seed: Option<u64>,

    /// Primary pass tolerance of the scenario.
    #[arg(long)]
    tol: Option<f64>,

    /// Truncation dimension M of H.
    #[arg(long)]
    truncation: Option<usize>,

    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<bool> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let flags = Overrides { seed: cli.seed, tol: cli.tol, truncation: cli.truncation, out: cli.out };
    let cfg = ExperimentConfig::resolve(cli.scenario, file, flags)?;
    let outcome = scenarios::run(&cfg)?;
    output::write_outputs(&cfg, &outcome)?;
    println!(
        "{}: {} (report in {})",
        cfg.scenario,
        if outcome.passed { "pass" } else { "FAIL" },
        cfg.out.join("report.json").display()
    );
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
