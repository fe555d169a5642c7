//! Discrete SIR-type COVID-19 model with saturated incidence and
//! occupancy-limited recovery, sliding-window estimation of its daily rates,
//! the effective reproduction number, and a PPKM restriction-level
//! recommendation from `(R_eff, bed occupancy)`.

pub mod data;
pub mod error;
pub mod estimation;
pub mod model;
pub mod policy;
pub mod reproduction;

pub use data::{
    build_dataset, load_cases, load_occupancy, Dataset, EpidemicRecord, OccupancyRecord,
    OccupancyUnit,
};
pub use error::{Error, ErrorKind, Result};
pub use estimation::{
    build_system, estimate_series, naive_rates, par_estimate_series, solve_box_ls, Bounds,
    LinearSystem, RateEstimate, ResidualMode, WindowConfig,
};
pub use model::{simulate, step, CompartmentState, DayRates, ModelParams, Trajectory};
pub use policy::{
    classify, classify_series, PandemicPoint, PolicyRecommendation, PolicyThresholds, PpkmLevel,
    Region,
};
pub use reproduction::{r_eff, r_eff_series, ReffPoint, ReffVariant};
