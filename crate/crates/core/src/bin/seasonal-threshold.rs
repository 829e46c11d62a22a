use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use seasonal_threshold::cli::{run_command, Command, RunOptions};
use seasonal_threshold::scenario::load_scenario;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    Floquet,
    Threshold,
    Check,
    Simulate,
    Poincare,
    Split,
    Verify,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Floquet => Command::Floquet,
            Cmd::Threshold => Command::Threshold,
            Cmd::Check => Command::Check,
            Cmd::Simulate => Command::Simulate,
            Cmd::Poincare => Command::Poincare,
            Cmd::Split => Command::Split,
            Cmd::Verify => Command::Verify,
        }
    }
}

/// Seasonal extinction/persistence thresholds for two-season systems.
#[derive(Debug, Parser)]
#[command(version)]
struct Args {
    command: Cmd,
    /// Scenario JSON file.
    #[arg(long)]
    scenario: PathBuf,
    /// Directory for report files.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Unfavorable fraction, overriding the scenario.
    #[arg(long)]
    theta: Option<f64>,
    /// Number of uniform grid points, overriding the scenario.
    #[arg(long)]
    grid: Option<usize>,
    /// Add the simulated Floquet multiplier to sweeps.
    #[arg(long)]
    with_simulation: bool,
    /// Bisection tolerance, overriding the scenario.
    #[arg(long)]
    tol: Option<f64>,
    /// Seed for randomized checks and split restarts.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Initial state for `simulate` and `poincare`, comma separated.
    #[arg(long, value_delimiter = ',')]
    x0: Option<Vec<f64>>,
    /// Horizon of `simulate`, in periods.
    #[arg(long, default_value_t = 20)]
    periods: usize,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = load_scenario(&args.scenario)
        .and_then(|s| s.with_overrides(args.theta, args.grid, args.tol))
        .and_then(|s| {
            let opts = RunOptions {
                out_dir: args.out.clone(),
                with_simulation: args.with_simulation,
                seed: args.seed,
                x0: args.x0.clone(),
                periods: args.periods,
            };
            run_command(args.command.into(), &s, &opts)
        });
    match result {
        Ok(out) => {
            print!("{}", out.summary);
            if out.complete {
                ExitCode::SUCCESS
            } else {
                eprintln!("some rows or certificates could not be evaluated");
                ExitCode::from(3)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
