//! Effective reproduction number.
//!
//! `R_eff = βλS / ((μ + γλ)(μ + μ' + α)N)`: the model's basic reproduction
//! number scaled by the susceptible fraction `S/N`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::estimation::RateEstimate;
use crate::model::{simulate, DayRates, ModelParams};

/// Which `(S, N)` pair enters the formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReffVariant {
    /// Observed `S_t` and `N_t = S_t + I_t + R_t`.
    DataBased,
    /// `Ŝ_t` and `N̂_t = Ŝ_t + Î_t + R̂_t` from a re-simulation seeded with the
    /// observed state on the first day.
    SimulationBased,
}

impl ReffVariant {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::DataBased => "data-based",
            Self::SimulationBased => "simulation-based",
        }
    }
}

impl fmt::Display for ReffVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ReffVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "data-based" | "data" => Ok(Self::DataBased),
            "simulation-based" | "simulation" => Ok(Self::SimulationBased),
            other => Err(Error::invalid(
                "variant",
                format!("unknown variant {other:?}"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReffPoint {
    pub day: i64,
    pub r_eff: f64,
    pub variant: ReffVariant,
}

/// Basic reproduction number `βλ / ((μ + γλ)(μ + μ' + α))`.
pub fn r0(params: &ModelParams, alpha: f64, beta: f64) -> f64 {
    let lambda = params.entry_rate;
    beta * lambda
        / ((params.death_rate + params.cautiousness * lambda)
            * (params.death_rate + params.excess_death_rate + alpha))
}

pub fn r_eff(
    params: &ModelParams,
    alpha: f64,
    beta: f64,
    susceptible: f64,
    population: f64,
) -> f64 {
    debug_assert!(population > 0.0 && alpha >= 0.0 && beta >= 0.0 && susceptible >= 0.0);
    let lambda = params.entry_rate;
    beta * lambda * susceptible
        / ((params.death_rate + params.cautiousness * lambda)
            * (params.death_rate + params.excess_death_rate + alpha)
            * population)
}

/// One point per estimate, pairing day `t`'s rates with day `t`'s state.
///
/// Estimates must cover consecutive days. The simulation-based variant starts
/// from the observed state on the first estimate's day and steps forward with
/// each day's estimated rates and observed occupancy.
pub fn r_eff_series(
    data: &Dataset,
    estimates: &[RateEstimate],
    params: &ModelParams,
    variant: ReffVariant,
) -> Result<Vec<ReffPoint>> {
    let Some(first) = estimates.first() else {
        return Ok(Vec::new());
    };
    for (k, est) in estimates.iter().enumerate() {
        if est.day != first.day + k as i64 {
            return Err(Error::invalid("estimates", "days must be consecutive"));
        }
    }
    let missing = |day| Error::MissingData {
        day,
        what: "compartments",
    };

    let point = |day, r_eff| ReffPoint {
        day,
        r_eff,
        variant,
    };
    match variant {
        ReffVariant::DataBased => estimates
            .iter()
            .map(|est| {
                let state = data.state(est.day).ok_or(missing(est.day))?;
                let r = r_eff(
                    params,
                    est.alpha,
                    est.beta,
                    state.susceptible,
                    state.total(),
                );
                Ok(point(est.day, r))
            })
            .collect(),
        ReffVariant::SimulationBased => {
            let initial = data.state(first.day).ok_or(missing(first.day))?;
            let schedule = estimates[..estimates.len() - 1]
                .iter()
                .map(|est| {
                    let rho = data.occupancy(est.day).ok_or(Error::MissingData {
                        day: est.day,
                        what: "occupancy",
                    })?;
                    DayRates::new(est.alpha, est.beta, rho)
                })
                .collect::<Result<Vec<_>>>()?;
            let states = if schedule.is_empty() {
                vec![initial]
            } else {
                simulate(initial, first.day, params, &schedule)?.states
            };
            Ok(estimates
                .iter()
                .zip(&states)
                .map(|(est, s)| {
                    point(
                        est.day,
                        r_eff(params, est.alpha, est.beta, s.susceptible, s.total()),
                    )
                })
                .collect())
        }
    }
}
