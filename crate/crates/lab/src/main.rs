use std::path::PathBuf;
use std::process::ExitCode;

use cbi_lab::{run, Experiment, ExperimentConfig};
use clap::Parser;

/// Numerical checks of limit theorems for subcritical CBI processes.
#[derive(Debug, Parser)]
#[command(name = "cbi-lab", version)]
struct Cli {
    experiment: Experiment,
    /// JSON or TOML document with a `model` block and an `experiment` block.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the config (default 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default `out/<experiment>`).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn execute(cli: &Cli) -> anyhow::Result<bool> {
    let cfg = ExperimentConfig::load(&cli.config)?;
    let seed = cli.seed.or(cfg.seed).unwrap_or(0);
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(cli.experiment.to_string()));
    let report = run(cli.experiment, &cfg, seed)?;
    report.write(&out)?;
    for check in &report.checks {
        let tag = if check.passed { "PASS" } else { "FAIL" };
        println!("{tag} {} value={} target={} tol={}", check.name, check.value, check.target, check.tolerance);
    }
    println!(
        "{}: {} ({} checks, results in {})",
        report.experiment,
        if report.passed { "all checks passed" } else { "some checks failed" },
        report.checks.len(),
        out.display()
    );
    Ok(report.passed)
}
