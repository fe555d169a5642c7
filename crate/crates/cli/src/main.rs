//! `ppkm`: estimate daily rates, compute R_eff and recommend PPKM levels
//! from case and bed-occupancy data.

mod commands;
mod config;
mod error;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::{SimulateArgs, VariantArg};
use crate::config::{CommonArgs, Settings};
use crate::error::CliResult;

#[derive(Debug, Parser)]
#[command(name = "ppkm", version, about)]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit daily recovery and incidence rates; writes rates.csv
    Estimate,
    /// Effective reproduction number; writes reff.csv (and reff_compare.csv for both variants)
    Reff {
        #[arg(long, value_enum, default_value = "both")]
        variant: VariantArg,
        /// Use a rates table instead of fitting
        #[arg(long, value_name = "PATH")]
        rates: Option<PathBuf>,
    },
    /// Recommend a PPKM level; writes policy.csv
    Classify {
        /// A single point
        #[arg(long, value_name = "R,RHO", conflicts_with = "series")]
        point: Option<String>,
        /// CSV with columns t,reff,rho
        #[arg(long, value_name = "PATH")]
        series: Option<PathBuf>,
    },
    /// Iterate the model forward; writes trajectory.csv
    Simulate {
        /// Number of days to step
        #[arg(long)]
        horizon: Option<usize>,
        /// Rates table with columns t,alpha,beta
        #[arg(long, value_name = "PATH", conflicts_with_all = ["alpha", "beta"])]
        rates: Option<PathBuf>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        /// Constant occupancy; defaults to the input data
        #[arg(long)]
        rho: Option<f64>,
        /// Initial state; defaults to the input data on --start
        #[arg(long, value_name = "S,I,R")]
        initial: Option<String>,
    },
    /// estimate, reff (both variants) and classify, plus summary.json
    Report,
}

fn run(cli: &Cli) -> CliResult<Vec<PathBuf>> {
    let settings = Settings::resolve(&cli.common)?;
    match &cli.command {
        Command::Estimate => commands::cmd_estimate(&settings),
        Command::Reff { variant, rates } => {
            commands::cmd_reff(&settings, *variant, rates.as_deref())
        }
        Command::Classify { point, series } => {
            commands::cmd_classify(&settings, point.as_deref(), series.as_deref())
        }
        Command::Simulate {
            horizon,
            rates,
            alpha,
            beta,
            rho,
            initial,
        } => commands::cmd_simulate(
            &settings,
            &SimulateArgs {
                horizon: *horizon,
                rates: rates.as_deref(),
                alpha: *alpha,
                beta: *beta,
                rho: *rho,
                initial: initial.as_deref(),
            },
        ),
        Command::Report => commands::cmd_report(&settings),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(written) => {
            for path in written {
                eprintln!("wrote {}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("{}", err.to_json());
            ExitCode::from(err.exit_code as u8)
        }
    }
}
