use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::Duration;
use clap::ValueEnum;
use ppkm_core::estimation::ActiveBounds;
use ppkm_core::{
    classify, classify_series, estimate_series, par_estimate_series, r_eff_series, simulate,
    CompartmentState, Dataset, DayRates, Error, PandemicPoint, PolicyRecommendation, RateEstimate,
    ReffPoint, ReffVariant,
};
use serde::Serialize;

use crate::config::{parse_point, parse_triple, Settings};
use crate::error::{CliError, CliResult};
use crate::table::{parse_cell, read_columns, write_file, Cell, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Data,
    Simulation,
    Both,
}

impl VariantArg {
    fn variants(self) -> &'static [ReffVariant] {
        match self {
            Self::Data => &[ReffVariant::DataBased],
            Self::Simulation => &[ReffVariant::SimulationBased],
            Self::Both => &[ReffVariant::DataBased, ReffVariant::SimulationBased],
        }
    }
}

/// Fails with `CoverageGap` unless `data` holds every day that fitting
/// `start ..= end` needs.
fn check_coverage(data: &Dataset, settings: &Settings) -> CliResult<()> {
    let first_needed = settings.start - settings.window.window as i64;
    let missing: Vec<_> = (first_needed..=settings.end)
        .filter(|&t| !data.contains(t))
        .map(|t| data.date(t))
        .collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(Error::CoverageGap {
            series: "dataset",
            missing,
        }
        .into())
    }
}

fn estimate(data: &Dataset, settings: &Settings) -> CliResult<Vec<RateEstimate>> {
    check_coverage(data, settings)?;
    let (p, w, b) = (&settings.params, &settings.window, &settings.bounds);
    let estimates = if settings.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(settings.jobs)
            .build()
            .map_err(|e| CliError::usage(format!("cannot start {} workers: {e}", settings.jobs)))?;
        pool.install(|| par_estimate_series(data, p, settings.start, settings.end, w, b))?
    } else {
        estimate_series(data, p, settings.start, settings.end, w, b)?
    };
    Ok(estimates)
}

fn rates_table(estimates: &[RateEstimate]) -> Table {
    let mut table = Table::new(
        "rates",
        &["t", "alpha", "beta", "residual_norm", "active_bounds"],
    );
    for e in estimates {
        table.push(vec![
            e.day.into(),
            e.alpha.into(),
            e.beta.into(),
            e.residual_norm.into(),
            e.active_bounds.to_string().into(),
        ]);
    }
    table
}

/// Reads a rates table. Only `t`, `alpha` and `beta` are required.
pub fn read_rates(path: &Path) -> CliResult<Vec<RateEstimate>> {
    let optional = read_columns(
        path,
        &["t", "alpha", "beta", "residual_norm", "active_bounds"],
    );
    let (rows, full) = match optional {
        Ok(rows) => (rows, true),
        Err(_) => (read_columns(path, &["t", "alpha", "beta"])?, false),
    };
    rows.into_iter()
        .map(|(line, f)| {
            Ok(RateEstimate {
                day: parse_cell(path, line, "t", &f[0])?,
                alpha: parse_cell(path, line, "alpha", &f[1])?,
                beta: parse_cell(path, line, "beta", &f[2])?,
                residual_norm: if full {
                    parse_cell(path, line, "residual_norm", &f[3])?
                } else {
                    f64::NAN
                },
                active_bounds: if full {
                    parse_cell::<ActiveBounds>(path, line, "active_bounds", &f[4])?
                } else {
                    ActiveBounds::default()
                },
            })
        })
        .collect()
}

pub fn cmd_estimate(settings: &Settings) -> CliResult<Vec<PathBuf>> {
    let data = settings.load_dataset()?;
    let estimates = estimate(&data, settings)?;
    Ok(vec![
        rates_table(&estimates).write(&settings.out, settings.format)?
    ])
}

struct ReffTables {
    long: Table,
    comparison: Option<Table>,
    data_based: Option<Vec<ReffPoint>>,
}

fn reff_tables(
    data: &Dataset,
    estimates: &[RateEstimate],
    settings: &Settings,
    variants: &[ReffVariant],
) -> CliResult<ReffTables> {
    let mut series = BTreeMap::new();
    for &variant in variants {
        series.insert(
            variant,
            r_eff_series(data, estimates, &settings.params, variant)?,
        );
    }
    let mut long = Table::new("reff", &["t", "reff", "variant"]);
    for &variant in variants {
        for pt in &series[&variant] {
            long.push(vec![
                pt.day.into(),
                pt.r_eff.into(),
                variant.as_str().into(),
            ]);
        }
    }
    let comparison = match (
        series.get(&ReffVariant::DataBased),
        series.get(&ReffVariant::SimulationBased),
    ) {
        (Some(a), Some(b)) => {
            let mut table = Table::new(
                "reff_compare",
                &["t", "data_based", "simulation_based", "abs_diff"],
            );
            for (x, y) in a.iter().zip(b) {
                table.push(vec![
                    x.day.into(),
                    x.r_eff.into(),
                    y.r_eff.into(),
                    (x.r_eff - y.r_eff).abs().into(),
                ]);
            }
            Some(table)
        }
        _ => None,
    };
    Ok(ReffTables {
        long,
        comparison,
        data_based: series.remove(&ReffVariant::DataBased),
    })
}

pub fn cmd_reff(
    settings: &Settings,
    variant: VariantArg,
    rates: Option<&Path>,
) -> CliResult<Vec<PathBuf>> {
    let data = settings.load_dataset()?;
    let estimates = match rates {
        Some(path) => read_rates(path)?,
        None => estimate(&data, settings)?,
    };
    let tables = reff_tables(&data, &estimates, settings, variant.variants())?;
    let mut written = vec![tables.long.write(&settings.out, settings.format)?];
    if let Some(cmp) = tables.comparison {
        written.push(cmp.write(&settings.out, settings.format)?);
    }
    Ok(written)
}

fn policy_table(rows: &[(Option<i64>, PandemicPoint, PolicyRecommendation)]) -> Table {
    let mut table = Table::new("policy", &["t", "reff", "rho", "level", "region", "note"]);
    for (day, point, rec) in rows {
        table.push(vec![
            day.map_or(Cell::Empty, Cell::Int),
            point.r_eff.into(),
            point.occupancy.into(),
            rec.level.as_str().into(),
            rec.region.as_str().into(),
            rec.note.as_str().into(),
        ]);
    }
    table
}

fn read_series(path: &Path) -> CliResult<Vec<(i64, PandemicPoint)>> {
    read_columns(path, &["t", "reff", "rho"])?
        .into_iter()
        .map(|(line, f)| {
            let day = parse_cell(path, line, "t", &f[0])?;
            let point = PandemicPoint::new(
                parse_cell(path, line, "reff", &f[1])?,
                parse_cell(path, line, "rho", &f[2])?,
            )
            .map_err(|e| CliError {
                line: Some(line),
                exit_code: crate::error::EXIT_DATA,
                ..CliError::from(e)
            })?;
            Ok((day, point))
        })
        .collect()
}

pub fn cmd_classify(
    settings: &Settings,
    point: Option<&str>,
    series: Option<&Path>,
) -> CliResult<Vec<PathBuf>> {
    let rows: Vec<(Option<i64>, PandemicPoint, PolicyRecommendation)> = match (point, series) {
        (Some(text), None) => {
            let [r, rho] = parse_point(text)?;
            let point = PandemicPoint::new(r, rho)?;
            let rec = classify(&point, &settings.thresholds);
            println!("{}\t{}\t{}", rec.level, rec.region, rec.note);
            vec![(None, point, rec)]
        }
        (None, Some(path)) => {
            let points = read_series(path)?;
            classify_series(&points, &settings.thresholds)
                .into_iter()
                .zip(&points)
                .map(|((day, rec), (_, point))| (Some(day), *point, rec))
                .collect()
        }
        _ => {
            return Err(CliError::usage(
                "classify needs exactly one of --point or --series",
            ))
        }
    };
    Ok(vec![
        policy_table(&rows).write(&settings.out, settings.format)?
    ])
}

pub struct SimulateArgs<'a> {
    pub horizon: Option<usize>,
    pub rates: Option<&'a Path>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub rho: Option<f64>,
    pub initial: Option<&'a str>,
}

pub fn cmd_simulate(settings: &Settings, args: &SimulateArgs) -> CliResult<Vec<PathBuf>> {
    let data = if settings.source.is_some() {
        Some(settings.load_dataset()?)
    } else {
        None
    };
    let start = settings.start;

    let initial = match (args.initial, &data) {
        (Some(text), _) => {
            let [s, i, r] = parse_triple("initial", text)?;
            CompartmentState::new(s, i, r)?
        }
        (None, Some(data)) => data.state(start).ok_or(Error::MissingData {
            day: start,
            what: "compartments",
        })?,
        (None, None) => return Err(CliError::usage("simulate needs --initial or input data")),
    };

    let file_rates = args.rates.map(read_rates).transpose()?;
    let by_day: BTreeMap<i64, (f64, f64)> = file_rates
        .iter()
        .flatten()
        .map(|e| (e.day, (e.alpha, e.beta)))
        .collect();
    let horizon = match (args.horizon, &file_rates) {
        (Some(h), _) => h,
        (None, Some(rows)) => rows.iter().filter(|e| e.day >= start).count(),
        (None, None) => return Err(CliError::usage("simulate needs --horizon")),
    };

    let mut schedule = Vec::with_capacity(horizon);
    for day in start..start + horizon as i64 {
        let (alpha, beta) = match (args.rates, args.alpha, args.beta) {
            (Some(_), None, None) => *by_day
                .get(&day)
                .ok_or(Error::MissingData { day, what: "rates" })?,
            (None, Some(a), Some(b)) => (a, b),
            _ => {
                return Err(CliError::usage(
                    "give either --rates or both --alpha and --beta",
                ))
            }
        };
        let rho = match (args.rho, &data) {
            (Some(rho), _) => rho,
            (None, Some(data)) => data.occupancy(day).ok_or(Error::MissingData {
                day,
                what: "occupancy",
            })?,
            (None, None) => return Err(CliError::usage("simulate needs --rho or input data")),
        };
        schedule.push(DayRates::new(alpha, beta, rho)?);
    }

    let states = if schedule.is_empty() {
        vec![initial]
    } else {
        simulate(initial, start, &settings.params, &schedule)?.states
    };
    let mut table = Table::new("trajectory", &["t", "S", "I", "R"]);
    for (day, s) in (start..).zip(&states) {
        table.push(vec![
            day.into(),
            s.susceptible.into(),
            s.infected.into(),
            s.recovered.into(),
        ]);
    }
    Ok(vec![table.write(&settings.out, settings.format)?])
}

#[derive(Serialize)]
struct SummaryDay {
    t: i64,
    date: String,
    reff: f64,
    rho: f64,
    level: &'static str,
    region: &'static str,
}

#[derive(Serialize)]
struct SummaryFill {
    date: String,
    source: String,
    value: f64,
}

#[derive(Serialize)]
struct Summary<'a> {
    anchor: String,
    start: i64,
    end: i64,
    params: &'a ppkm_core::ModelParams,
    window: &'a ppkm_core::WindowConfig,
    bounds: &'a ppkm_core::Bounds,
    thresholds: &'a ppkm_core::PolicyThresholds,
    reff_variant: &'static str,
    days: Vec<SummaryDay>,
    occupancy_fills: Vec<SummaryFill>,
}

/// estimate → R_eff (both variants) → classify, plus `summary.json`.
pub fn cmd_report(settings: &Settings) -> CliResult<Vec<PathBuf>> {
    let data = settings.load_dataset()?;
    let estimates = estimate(&data, settings)?;
    let reff = reff_tables(&data, &estimates, settings, VariantArg::Both.variants())?;
    let data_based = reff.data_based.expect("data-based variant requested");

    let mut rows = Vec::with_capacity(data_based.len());
    for pt in &data_based {
        let rho = data.occupancy(pt.day).ok_or(Error::MissingData {
            day: pt.day,
            what: "occupancy",
        })?;
        let point = PandemicPoint::new(pt.r_eff, rho)?;
        rows.push((Some(pt.day), point, classify(&point, &settings.thresholds)));
    }

    let summary = Summary {
        anchor: data.anchor().to_string(),
        start: settings.start,
        end: settings.end,
        params: &settings.params,
        window: &settings.window,
        bounds: &settings.bounds,
        thresholds: &settings.thresholds,
        reff_variant: ReffVariant::DataBased.as_str(),
        days: rows
            .iter()
            .map(|(day, point, rec)| {
                let t = day.expect("series rows carry a day");
                SummaryDay {
                    t,
                    date: (data.anchor() + Duration::days(t)).to_string(),
                    reff: point.r_eff,
                    rho: point.occupancy,
                    level: rec.level.as_str(),
                    region: rec.region.as_str(),
                }
            })
            .collect(),
        occupancy_fills: data
            .fills()
            .iter()
            .map(|f| SummaryFill {
                date: f.date.to_string(),
                source: f.source.to_string(),
                value: f.value,
            })
            .collect(),
    };

    let mut written = vec![
        rates_table(&estimates).write(&settings.out, settings.format)?,
        reff.long.write(&settings.out, settings.format)?,
    ];
    if let Some(cmp) = reff.comparison {
        written.push(cmp.write(&settings.out, settings.format)?);
    }
    written.push(policy_table(&rows).write(&settings.out, settings.format)?);
    let summary_path = settings.out.join("summary.json");
    let mut text = serde_json::to_string_pretty(&summary).expect("serialisable summary");
    text.push('\n');
    write_file(&summary_path, text.as_bytes())?;
    written.push(summary_path);
    Ok(written)
}
