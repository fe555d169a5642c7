#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use chrono::{Duration, NaiveDate};
use ppkm_core::{simulate, CompartmentState, Dataset, DayRates, ModelParams, Trajectory};

pub const ALPHA: f64 = 0.07;
pub const BETA: f64 = 0.028;
pub const FIRST_DAY: i64 = -90;
pub const LAST_DAY: i64 = 30;

pub fn anchor() -> NaiveDate {
    NaiveDate::from_ymd_opt(2021, 8, 7).unwrap()
}

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn fixture(name: &str) -> PathBuf {
    fixtures().join(name)
}

/// Occupancy in percent: 42.5 before day 0, then one point lower per day,
/// first dropping below 20 on day 23.
pub fn occupancy_percent(t: i64) -> f64 {
    if t < 0 {
        42.5
    } else {
        42.5 - t as f64
    }
}

pub fn synthetic_trajectory() -> Trajectory {
    let initial = CompartmentState::new(9_652_496.0, 12_799.0, 802_334.0).unwrap();
    let schedule: Vec<DayRates> = (FIRST_DAY..LAST_DAY)
        .map(|t| DayRates::new(ALPHA, BETA, occupancy_percent(t) / 100.0).unwrap())
        .collect();
    simulate(initial, FIRST_DAY, &ModelParams::default(), &schedule).unwrap()
}

/// Bundled synthetic inputs as `(file name, contents)`.
pub fn synthetic_files() -> Vec<(&'static str, String)> {
    let traj = synthetic_trajectory();
    let rho: Vec<f64> = (FIRST_DAY..=LAST_DAY)
        .map(|t| occupancy_percent(t) / 100.0)
        .collect();
    let data =
        Dataset::from_trajectory(&traj, &rho, anchor(), ModelParams::default().population).unwrap();
    let mut dataset = Vec::new();
    data.write_csv(&mut dataset).unwrap();

    let mut cases = String::from("date,infected,recovered\n");
    let mut occupancy = String::from("date,occupancy\n");
    for (t, s) in (FIRST_DAY..).zip(&traj.states) {
        let date = anchor() + Duration::days(t);
        cases.push_str(&format!(
            "{date},{},{}\n",
            s.infected.round(),
            s.recovered.round()
        ));
        occupancy.push_str(&format!("{date},{:.1}\n", occupancy_percent(t)));
    }
    vec![
        ("synthetic_dataset.csv", String::from_utf8(dataset).unwrap()),
        ("synthetic_cases.csv", cases),
        ("synthetic_occupancy.csv", occupancy),
    ]
}

pub fn ppkm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ppkm"))
        .args(args)
        .output()
        .expect("run ppkm")
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Parses the JSON error object printed on failure.
pub fn error_json(out: &Output) -> serde_json::Value {
    let line = stderr(out)
        .lines()
        .find(|l| l.starts_with('{'))
        .unwrap_or_else(|| panic!("no JSON error in {:?}", stderr(out)))
        .to_owned();
    serde_json::from_str(&line).unwrap()
}

/// Rows of a CSV file as maps from column name to text.
pub fn read_csv(path: &Path) -> Vec<std::collections::HashMap<String, String>> {
    let mut reader = csv::Reader::from_path(path).unwrap();
    let header = reader.headers().unwrap().clone();
    reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            header
                .iter()
                .map(str::to_owned)
                .zip(r.iter().map(str::to_owned))
                .collect()
        })
        .collect()
}

pub fn num(row: &std::collections::HashMap<String, String>, key: &str) -> f64 {
    row[key]
        .parse()
        .unwrap_or_else(|e| panic!("{key}={:?}: {e}", row[key]))
}
