//! Sliding-window estimation of the daily recovery and incidence rates.
//!
//! For day `t` every observed transition `s → s+1` with `s` in
//! `t−W ..= t−1` is substituted into the model recursion. The infected row is
//! linear in the unknown `(α, β)`:
//!
//! ```text
//! I_{s+1} − (1−μ−μ')I_s = β·S_sI_s/(1+γS_s) − α·I_s/(1+ρ_sI_s)
//! ```
//!
//! and the resulting overdetermined system is solved in the least-squares
//! sense inside a bounds box by [`solve_box_ls`].

mod box_ls;

pub use box_ls::{
    solve_box_ls, unconstrained_ls, ActiveBounds, Bounds, LinearSystem, RateEstimate,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResidualMode {
    /// One equation per day, from the infected row.
    #[default]
    InfectedOnly,
    /// Three equations per day; the susceptible and recovered rows each
    /// involve a single unknown.
    AllCompartments,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowConfig {
    pub window: usize,
    pub residual_mode: ResidualMode,
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self {
            window: 90,
            residual_mode: ResidualMode::InfectedOnly,
        }
    }
}

impl WindowConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window < 2 {
            return Err(Error::invalid("window", "window length must be at least 2"));
        }
        Ok(())
    }
}

/// Builds the least-squares system for day `t` from the `config.window` days
/// preceding it.
///
/// Rows are arranged so that the residual is `A·(α, β) − b`. The infected row
/// for day `s` is `(I_s/(1+ρ_sI_s), −S_sI_s/(1+γS_s))` with
/// `b_s = (1−μ−μ')I_s − I_{s+1}`. In [`ResidualMode::AllCompartments`] the
/// susceptible rows `(0, S_sI_s/(1+γS_s))`, `b = (1−μ)S_s + λ − S_{s+1}` and
/// recovered rows `(I_s/(1+ρ_sI_s), 0)`, `b = R_{s+1} − (1−μ)R_s` follow.
pub fn build_system(
    data: &Dataset,
    params: &ModelParams,
    t: i64,
    config: &WindowConfig,
) -> Result<LinearSystem> {
    config.validate()?;
    let width = config.window as i64;
    let rows_per_day = match config.residual_mode {
        ResidualMode::InfectedOnly => 1,
        ResidualMode::AllCompartments => 3,
    };
    let mut infected_rows = Vec::with_capacity(config.window);
    let mut susceptible_rows = Vec::new();
    let mut recovered_rows = Vec::new();

    let missing = |day, what| Error::MissingData { day, what };
    for s in (t - width)..t {
        let now = data.state(s).ok_or(missing(s, "compartments"))?;
        let next = data.state(s + 1).ok_or(missing(s + 1, "compartments"))?;
        let rho = data.occupancy(s).ok_or(missing(s, "occupancy"))?;

        let saturated_recovery = now.infected / (1.0 + rho * now.infected);
        let saturated_incidence =
            now.susceptible * now.infected / (1.0 + params.cautiousness * now.susceptible);
        let retained = 1.0 - params.death_rate - params.excess_death_rate;
        infected_rows.push((
            [saturated_recovery, -saturated_incidence],
            retained * now.infected - next.infected,
        ));
        if rows_per_day == 3 {
            susceptible_rows.push((
                [0.0, saturated_incidence],
                (1.0 - params.death_rate) * now.susceptible + params.entry_rate - next.susceptible,
            ));
            recovered_rows.push((
                [saturated_recovery, 0.0],
                next.recovered - (1.0 - params.death_rate) * now.recovered,
            ));
        }
    }

    let (rows, rhs) = infected_rows
        .into_iter()
        .chain(susceptible_rows)
        .chain(recovered_rows)
        .unzip();
    let system = LinearSystem { day: t, rows, rhs };
    debug_assert_eq!(system.len(), rows_per_day * config.window);
    system.check_columns()?;
    Ok(system)
}

/// Fits one day.
pub fn estimate_day(
    data: &Dataset,
    params: &ModelParams,
    t: i64,
    config: &WindowConfig,
    bounds: &Bounds,
) -> Result<RateEstimate> {
    let system = build_system(data, params, t, config)?;
    solve_box_ls(&system, bounds)
}

/// Fits every day of `start ..= end` independently.
pub fn estimate_series(
    data: &Dataset,
    params: &ModelParams,
    start: i64,
    end: i64,
    config: &WindowConfig,
    bounds: &Bounds,
) -> Result<Vec<RateEstimate>> {
    check_range(start, end, config, bounds)?;
    (start..=end)
        .map(|t| estimate_day(data, params, t, config, bounds))
        .collect()
}

/// Same as [`estimate_series`], fitting days on the rayon thread pool. The
/// output is bitwise identical to the sequential version.
pub fn par_estimate_series(
    data: &Dataset,
    params: &ModelParams,
    start: i64,
    end: i64,
    config: &WindowConfig,
    bounds: &Bounds,
) -> Result<Vec<RateEstimate>> {
    check_range(start, end, config, bounds)?;
    (start..=end)
        .into_par_iter()
        .map(|t| estimate_day(data, params, t, config, bounds))
        .collect()
}

fn check_range(start: i64, end: i64, config: &WindowConfig, bounds: &Bounds) -> Result<()> {
    if start > end {
        return Err(Error::invalid(
            "range",
            format!("start {start} is after end {end}"),
        ));
    }
    config.validate()?;
    bounds.validate()
}

/// The naive proxy `(α̂, β̂) = (R_{t−1}/N₀, I_{t−1}/N₀)`.
pub fn naive_rates(prev_infected: f64, prev_recovered: f64, population: f64) -> (f64, f64) {
    debug_assert!(population > 0.0 && prev_infected >= 0.0 && prev_recovered >= 0.0);
    (prev_recovered / population, prev_infected / population)
}
