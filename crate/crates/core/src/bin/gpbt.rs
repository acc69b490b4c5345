use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gp_backlund::config::ExperimentConfig;
use gp_backlund::experiment::{run_solve, run_transform, run_verify, run_wavefunction, Report, RunError};

#[derive(Parser)]
#[command(name = "gpbt", version, about = "Backlund transformations for the reduced Gross-Pitaevskii equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the seed solution and write its CSV
    Solve(Common),
    /// Apply the shift schedule to the seed
    Transform(Common),
    /// Run the identity checks
    Verify(Common),
    /// Write the wave function over the grid and time samples
    Wavefunction {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0")]
        t_samples: Vec<f64>,
    },
}

fn summarize(report: &Report) {
    for c in &report.checks {
        let status = if c.pass { "pass" } else { "FAIL" };
        println!("{status} {} deviation={:.3e} tolerance={:.1e}", c.name, c.deviation, c.tolerance);
    }
    for e in &report.elements {
        println!(
            "element {} K={} points={} residual_max={:.3e} fixed_point={} deviation={:.3e} -> {}",
            e.index, e.k, e.points, e.residual_max, e.fixed_point, e.fixed_point_deviation, e.csv
        );
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = match &cli.command {
        Command::Solve(c) | Command::Transform(c) | Command::Verify(c) => c,
        Command::Wavefunction { common, .. } => common,
    };
    let result = ExperimentConfig::load(&common.config)
        .map_err(RunError::from)
        .and_then(|cfg| match &cli.command {
            Command::Solve(_) => run_solve(&cfg, &common.out_dir),
            Command::Transform(_) => run_transform(&cfg, &common.out_dir),
            Command::Verify(_) => run_verify(&cfg, &common.out_dir),
            Command::Wavefunction { t_samples, .. } => run_wavefunction(&cfg, &common.out_dir, t_samples),
        });
    match result {
        Ok(report) => {
            summarize(&report);
            if matches!(cli.command, Command::Verify(_)) && !report.all_pass() {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
