//! Discrete-time SIR model with saturated incidence and occupancy-limited
//! recovery.
//!
//! One day of the model maps `(S, I, R)` to
//!
//! ```text
//! S' = S + λ − μS − βSI/(1+γS)
//! I' = I − μI − μ'I + βSI/(1+γS) − αI/(1+ρI)
//! R' = R − μR + αI/(1+ρI)
//! ```
//!
//! where `λ, μ, μ', γ` are fixed ([`ModelParams`]) and `α, β, ρ` may change
//! from day to day ([`DayRates`]). Compartments are real-valued and are never
//! rounded or clamped; a negative output is reported as an error.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Population of DKI Jakarta used as the default `N`.
pub const JAKARTA_POPULATION: f64 = 10_467_629.0;

/// Fixed model constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// λ, individuals entering the susceptible class per day.
    pub entry_rate: f64,
    /// μ, natural death rate per day.
    pub death_rate: f64,
    /// μ', additional death rate of infected individuals per day.
    pub excess_death_rate: f64,
    /// γ, cautiousness of susceptibles, in `[0, 1]`.
    pub cautiousness: f64,
    /// N, nominal population size.
    pub population: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            // 10,467,629 / (65 × 265), kept as the exact ratio.
            entry_rate: JAKARTA_POPULATION / (65.0 * 265.0),
            death_rate: 0.000_042_149_6,
            excess_death_rate: 0.06,
            cautiousness: 0.35,
            population: JAKARTA_POPULATION,
        }
    }
}

impl ModelParams {
    pub fn new(
        entry_rate: f64,
        death_rate: f64,
        excess_death_rate: f64,
        cautiousness: f64,
        population: f64,
    ) -> Result<Self> {
        let params = Self {
            entry_rate,
            death_rate,
            excess_death_rate,
            cautiousness,
            population,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        positive("entry_rate", self.entry_rate)?;
        positive("death_rate", self.death_rate)?;
        positive("excess_death_rate", self.excess_death_rate)?;
        unit_interval("cautiousness", self.cautiousness)?;
        positive("population", self.population)
    }
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            name,
            format!("{value} is not a positive number"),
        ))
    }
}

pub(crate) fn unit_interval(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("{value} is outside [0, 1]")))
    }
}

/// Time-dependent inputs of one model day.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DayRates {
    /// α̂, recovery rate.
    pub recovery: f64,
    /// β̂, incidence rate.
    pub incidence: f64,
    /// ρ, hospital bed-occupancy rate.
    pub occupancy: f64,
}

impl DayRates {
    pub fn new(recovery: f64, incidence: f64, occupancy: f64) -> Result<Self> {
        unit_interval("recovery", recovery)?;
        unit_interval("incidence", incidence)?;
        unit_interval("occupancy", occupancy)?;
        Ok(Self {
            recovery,
            incidence,
            occupancy,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompartmentState {
    pub susceptible: f64,
    pub infected: f64,
    pub recovered: f64,
}

impl CompartmentState {
    pub fn new(susceptible: f64, infected: f64, recovered: f64) -> Result<Self> {
        let state = Self {
            susceptible,
            infected,
            recovered,
        };
        state.check(0)?;
        Ok(state)
    }

    pub fn total(&self) -> f64 {
        self.susceptible + self.infected + self.recovered
    }

    fn check(&self, day: i64) -> Result<()> {
        for (compartment, value) in [
            ("susceptible", self.susceptible),
            ("infected", self.infected),
            ("recovered", self.recovered),
        ] {
            if value.is_nan() || value < 0.0 || value.is_infinite() {
                return Err(Error::NegativeCompartment {
                    day,
                    compartment,
                    value,
                });
            }
        }
        Ok(())
    }
}

/// Saturated incidence `βSI/(1+γS)`.
pub fn transmission(incidence: f64, cautiousness: f64, s: f64, i: f64) -> f64 {
    incidence * s * i / (1.0 + cautiousness * s)
}

/// Occupancy-limited recovery `αI/(1+ρI)`.
pub fn recovery(rate: f64, occupancy: f64, i: f64) -> f64 {
    rate * i / (1.0 + occupancy * i)
}

/// Advances `state` by one day.
///
/// A negative output compartment is returned as
/// [`Error::NegativeCompartment`] with `day` 0; [`simulate`] rewrites it to the
/// absolute day of the failing step.
pub fn step(
    state: &CompartmentState,
    params: &ModelParams,
    rates: &DayRates,
) -> Result<CompartmentState> {
    let CompartmentState {
        susceptible: s,
        infected: i,
        recovered: r,
    } = *state;
    let mu = params.death_rate;
    let infections = transmission(rates.incidence, params.cautiousness, s, i);
    let recoveries = recovery(rates.recovery, rates.occupancy, i);

    let next = CompartmentState {
        susceptible: s + params.entry_rate - mu * s - infections,
        infected: i - mu * i - params.excess_death_rate * i + infections - recoveries,
        recovered: r - mu * r + recoveries,
    };
    next.check(0)?;
    Ok(next)
}

/// States at consecutive day boundaries together with the rates that produced
/// them. `states[k]` is the state on day `start + k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub start: i64,
    pub states: Vec<CompartmentState>,
    pub rates: Vec<DayRates>,
}

impl Trajectory {
    pub fn end(&self) -> i64 {
        self.start + self.rates.len() as i64
    }

    pub fn state(&self, day: i64) -> Option<&CompartmentState> {
        usize::try_from(day - self.start)
            .ok()
            .and_then(|k| self.states.get(k))
    }

    pub fn days(&self) -> impl Iterator<Item = (i64, &CompartmentState)> + '_ {
        (self.start..).zip(self.states.iter())
    }
}

/// Iterates [`step`] over `schedule`, starting from `initial` on day `start`.
pub fn simulate(
    initial: CompartmentState,
    start: i64,
    params: &ModelParams,
    schedule: &[DayRates],
) -> Result<Trajectory> {
    if schedule.is_empty() {
        return Err(Error::EmptySchedule);
    }
    initial.check(start)?;
    let mut states = Vec::with_capacity(schedule.len() + 1);
    states.push(initial);
    let mut current = initial;
    for (day, rates) in (start..).zip(schedule) {
        current = step(&current, params, rates).map_err(|err| match err {
            Error::NegativeCompartment {
                compartment, value, ..
            } => Error::NegativeCompartment {
                day: day + 1,
                compartment,
                value,
            },
            other => other,
        })?;
        states.push(current);
    }
    Ok(Trajectory {
        start,
        states,
        rates: schedule.to_vec(),
    })
}
