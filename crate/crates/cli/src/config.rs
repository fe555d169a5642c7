//! Run configuration: an optional JSON file overridden by command-line flags.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use clap::{Args, ValueEnum};
use ppkm_core::{
    build_dataset, load_cases, load_occupancy, Bounds, Dataset, ModelParams, OccupancyUnit,
    PolicyThresholds, ResidualMode, WindowConfig,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ResidualModeArg {
    InfectedOnly,
    All,
}

impl From<ResidualModeArg> for ResidualMode {
    fn from(arg: ResidualModeArg) -> Self {
        match arg {
            ResidualModeArg::InfectedOnly => ResidualMode::InfectedOnly,
            ResidualModeArg::All => ResidualMode::AllCompartments,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OccupancyUnitArg {
    Fraction,
    Percent,
}

impl From<OccupancyUnitArg> for OccupancyUnit {
    fn from(arg: OccupancyUnitArg) -> Self {
        match arg {
            OccupancyUnitArg::Fraction => OccupancyUnit::Fraction,
            OccupancyUnitArg::Percent => OccupancyUnit::Percent,
        }
    }
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// JSON run configuration; flags take precedence over its values
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Cases CSV (`date,infected,recovered`)
    #[arg(long, global = true, value_name = "PATH")]
    pub cases: Option<PathBuf>,
    /// Occupancy CSV (`date,occupancy`)
    #[arg(long, global = true, value_name = "PATH")]
    pub occupancy: Option<PathBuf>,
    /// Previously exported dataset (`t,date,S,I,R,rho`), instead of cases and occupancy
    #[arg(long, global = true, value_name = "PATH", conflicts_with_all = ["cases", "occupancy"])]
    pub dataset: Option<PathBuf>,
    /// Calendar date of day 0 (YYYY-MM-DD)
    #[arg(long, global = true, value_name = "DATE")]
    pub anchor: Option<NaiveDate>,
    #[arg(long, global = true, value_name = "INT")]
    pub population: Option<u64>,
    /// Estimation window length in days
    #[arg(long, global = true, value_name = "INT")]
    pub window: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub residual_mode: Option<ResidualModeArg>,
    #[arg(long, global = true, value_name = "A_MIN,A_MAX,B_MIN,B_MAX")]
    pub bounds: Option<String>,
    #[arg(long, global = true, value_name = "R_LOW,R_HIGH,RHO")]
    pub thresholds: Option<String>,
    #[arg(long, global = true, value_enum)]
    pub occupancy_unit: Option<OccupancyUnitArg>,
    /// Output directory
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
    /// First day of the analysed range
    #[arg(long, global = true, value_name = "T", allow_hyphen_values = true)]
    pub start: Option<i64>,
    /// Last day of the analysed range (inclusive)
    #[arg(long, global = true, value_name = "T", allow_hyphen_values = true)]
    pub end: Option<i64>,
    /// Worker threads for per-day estimation
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamOverrides {
    pub entry_rate: Option<f64>,
    pub death_rate: Option<f64>,
    pub excess_death_rate: Option<f64>,
    pub cautiousness: Option<f64>,
}

/// Contents of a `--config` file. Every field is optional; relative paths are
/// resolved against the file's directory.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub cases: Option<PathBuf>,
    pub occupancy: Option<PathBuf>,
    pub dataset: Option<PathBuf>,
    pub anchor: Option<NaiveDate>,
    pub population: Option<u64>,
    pub params: Option<ParamOverrides>,
    pub window: Option<usize>,
    pub residual_mode: Option<ResidualMode>,
    pub bounds: Option<Bounds>,
    pub thresholds: Option<PolicyThresholds>,
    pub occupancy_unit: Option<OccupancyUnit>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub start: Option<i64>,
    pub end: Option<i64>,
    pub jobs: Option<usize>,
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        let mut config: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [
            &mut config.cases,
            &mut config.occupancy,
            &mut config.dataset,
            &mut config.out,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(config)
    }
}

pub const DEFAULT_START: i64 = 0;
pub const DEFAULT_END: i64 = 30;

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Dataset(PathBuf),
    Raw { cases: PathBuf, occupancy: PathBuf },
}

/// Fully resolved settings for one run.
#[derive(Debug, Clone)]
pub struct Settings {
    pub source: Option<DataSource>,
    pub anchor: Option<NaiveDate>,
    pub params: ModelParams,
    pub window: WindowConfig,
    pub bounds: Bounds,
    pub thresholds: PolicyThresholds,
    pub occupancy_unit: OccupancyUnit,
    pub out: PathBuf,
    pub format: OutputFormat,
    pub start: i64,
    pub end: i64,
    pub jobs: usize,
}

fn parse_list<const N: usize>(flag: &str, text: &str) -> CliResult<[f64; N]> {
    let values: Vec<f64> = text
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::usage(format!("--{flag} {text:?}: {e}")))?;
    values
        .try_into()
        .map_err(|_| CliError::usage(format!("--{flag} expects {N} comma-separated numbers")))
}

pub fn parse_point(text: &str) -> CliResult<[f64; 2]> {
    parse_list::<2>("point", text)
}

pub fn parse_triple(flag: &str, text: &str) -> CliResult<[f64; 3]> {
    parse_list::<3>(flag, text)
}

fn require_file(path: &Path) -> CliResult<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::config(format!(
            "input file {} does not exist",
            path.display()
        )))
    }
}

impl Settings {
    pub fn resolve(args: &CommonArgs) -> CliResult<Self> {
        let file = match &args.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };

        let dataset = args.dataset.clone().or_else(|| {
            // A dataset from the file loses to raw inputs given as flags.
            if args.cases.is_some() || args.occupancy.is_some() {
                None
            } else {
                file.dataset.clone()
            }
        });
        let source = match dataset {
            Some(path) => {
                require_file(&path)?;
                Some(DataSource::Dataset(path))
            }
            None => {
                let cases = args.cases.clone().or(file.cases);
                let occupancy = args.occupancy.clone().or(file.occupancy);
                match (cases, occupancy) {
                    (Some(cases), Some(occupancy)) => {
                        require_file(&cases)?;
                        require_file(&occupancy)?;
                        Some(DataSource::Raw { cases, occupancy })
                    }
                    (None, None) => None,
                    _ => {
                        return Err(CliError::usage(
                            "--cases and --occupancy must be given together",
                        ))
                    }
                }
            }
        };

        let population = args.population.or(file.population);
        let mut params = ModelParams::default();
        if let Some(n) = population {
            params.population = n as f64;
        }
        if let Some(o) = file.params {
            params.entry_rate = o.entry_rate.unwrap_or(params.entry_rate);
            params.death_rate = o.death_rate.unwrap_or(params.death_rate);
            params.excess_death_rate = o.excess_death_rate.unwrap_or(params.excess_death_rate);
            params.cautiousness = o.cautiousness.unwrap_or(params.cautiousness);
        }
        params.validate()?;

        let mut window = WindowConfig::default();
        if let Some(w) = args.window.or(file.window) {
            window.window = w;
        }
        if let Some(mode) = args
            .residual_mode
            .map(ResidualMode::from)
            .or(file.residual_mode)
        {
            window.residual_mode = mode;
        }
        window.validate()?;

        let bounds = match &args.bounds {
            Some(text) => {
                let [a0, a1, b0, b1] = parse_list::<4>("bounds", text)?;
                Bounds::new(a0, a1, b0, b1)?
            }
            None => file.bounds.unwrap_or_default(),
        };
        bounds.validate()?;

        let thresholds = match &args.thresholds {
            Some(text) => {
                let [lo, hi, rho] = parse_triple("thresholds", text)?;
                PolicyThresholds::new(lo, hi, rho)?
            }
            None => file.thresholds.unwrap_or_default(),
        };
        thresholds.validate()?;

        let start = args.start.or(file.start).unwrap_or(DEFAULT_START);
        let end = args.end.or(file.end).unwrap_or(DEFAULT_END);
        if start > end {
            return Err(CliError::usage(format!(
                "--start {start} is after --end {end}"
            )));
        }
        let jobs = args.jobs.or(file.jobs).unwrap_or(1);
        if jobs == 0 {
            return Err(CliError::usage("--jobs must be at least 1"));
        }

        Ok(Self {
            source,
            anchor: args.anchor.or(file.anchor),
            params,
            window,
            bounds,
            thresholds,
            occupancy_unit: args
                .occupancy_unit
                .map(OccupancyUnit::from)
                .or(file.occupancy_unit)
                .unwrap_or_default(),
            out: args
                .out
                .clone()
                .or(file.out)
                .unwrap_or_else(|| PathBuf::from("out")),
            format: args.format.or(file.format).unwrap_or_default(),
            start,
            end,
            jobs,
        })
    }

    pub fn load_dataset(&self) -> CliResult<Dataset> {
        let data = match &self.source {
            None => {
                return Err(CliError::usage(
                    "no input data: give --dataset or --cases with --occupancy",
                ))
            }
            Some(DataSource::Dataset(path)) => {
                let data = Dataset::load_csv(path)?;
                match self.anchor {
                    Some(anchor) => data.with_anchor(anchor)?,
                    None => data,
                }
            }
            Some(DataSource::Raw { cases, occupancy }) => {
                let anchor = self.anchor.ok_or_else(|| {
                    CliError::usage("--anchor is required with --cases/--occupancy")
                })?;
                let cases = load_cases(cases)?;
                let occupancy = load_occupancy(occupancy, self.occupancy_unit)?;
                build_dataset(&cases, &occupancy, anchor, self.params.population as u64)?
            }
        };
        for fill in data.fills() {
            eprintln!(
                "note: occupancy on {} forward-filled from {} ({})",
                fill.date, fill.source, fill.value
            );
        }
        Ok(data)
    }
}
