//! Case and bed-occupancy ingestion, and the day-indexed [`Dataset`].
//!
//! Input files are CSV with ISO-8601 dates:
//!
//! * cases: `date,infected,recovered` (non-negative integers)
//! * occupancy: `date,occupancy` (a fraction or a percentage, see
//!   [`OccupancyUnit`])
//!
//! A dataset is exported as `t,date,S,I,R,rho`, where `t` counts days from the
//! anchor date.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CompartmentState, Trajectory};

/// Longest run of missing occupancy days that is forward-filled.
pub const MAX_OCCUPANCY_FILL: usize = 3;

const DATE_FORMAT: &str = "%Y-%m-%d";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpidemicRecord {
    pub date: NaiveDate,
    pub infected: u64,
    pub recovered: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OccupancyRecord {
    pub date: NaiveDate,
    /// Fraction of beds occupied, in `[0, 1]`.
    pub occupancy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OccupancyUnit {
    Fraction,
    #[default]
    Percent,
}

impl FromStr for OccupancyUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fraction" => Ok(Self::Fraction),
            "percent" => Ok(Self::Percent),
            other => Err(Error::invalid(
                "occupancy_unit",
                format!("expected fraction or percent, got {other:?}"),
            )),
        }
    }
}

impl fmt::Display for OccupancyUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Fraction => "fraction",
            Self::Percent => "percent",
        })
    }
}

/// A day whose occupancy was copied from the last observed day.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OccupancyFill {
    pub date: NaiveDate,
    pub source: NaiveDate,
    pub value: f64,
}

fn io_error(path: &str, err: impl fmt::Display) -> Error {
    Error::Io {
        path: path.to_owned(),
        message: err.to_string(),
    }
}

fn parse_error(source: &str, line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        path: source.to_owned(),
        line,
        message: message.into(),
    }
}

/// Reads a headed CSV, checking the header and handing each data row (with
/// its 1-based line number) to `parse_row`.
fn read_table<R: Read, T>(
    reader: R,
    source: &str,
    header: &[&str],
    mut parse_row: impl FnMut(u64, &csv::StringRecord) -> Result<T>,
) -> Result<Vec<T>> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = csv.records();
    let mut out = Vec::new();
    match records.next() {
        None => return Ok(out),
        Some(first) => {
            let first = first.map_err(|e| parse_error(source, 1, e.to_string()))?;
            if first.iter().ne(header.iter().copied()) {
                return Err(parse_error(
                    source,
                    1,
                    format!(
                        "expected header {:?}, found {:?}",
                        header.join(","),
                        first.iter().collect::<Vec<_>>().join(",")
                    ),
                ));
            }
        }
    }
    for record in records {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_error(source, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != header.len() {
            return Err(parse_error(
                source,
                line,
                format!("expected {} fields, found {}", header.len(), record.len()),
            ));
        }
        out.push(parse_row(line, &record)?);
    }
    Ok(out)
}

fn parse_date(source: &str, line: u64, field: &str) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(field, DATE_FORMAT)
        .map_err(|e| parse_error(source, line, format!("bad date {field:?}: {e}")))
}

fn parse_field<T: FromStr>(source: &str, line: u64, name: &str, field: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    field
        .parse()
        .map_err(|e| parse_error(source, line, format!("bad {name} {field:?}: {e}")))
}

/// Rejects duplicate and decreasing dates.
fn check_order(source: &str, dated: &[(u64, NaiveDate)]) -> Result<()> {
    for pair in dated.windows(2) {
        let (_, prev) = pair[0];
        let (line, date) = pair[1];
        if date == prev {
            return Err(Error::DuplicateDate {
                path: source.to_owned(),
                line,
                date,
            });
        }
        if date < prev {
            return Err(Error::NonMonotoneDate {
                path: source.to_owned(),
                line,
                date,
            });
        }
    }
    Ok(())
}

pub fn read_cases<R: Read>(reader: R, source: &str) -> Result<Vec<EpidemicRecord>> {
    let rows = read_table(
        reader,
        source,
        &["date", "infected", "recovered"],
        |line, rec| {
            Ok((
                line,
                EpidemicRecord {
                    date: parse_date(source, line, &rec[0])?,
                    infected: parse_field(source, line, "infected", &rec[1])?,
                    recovered: parse_field(source, line, "recovered", &rec[2])?,
                },
            ))
        },
    )?;
    check_order(
        source,
        &rows.iter().map(|(l, r)| (*l, r.date)).collect::<Vec<_>>(),
    )?;
    Ok(rows.into_iter().map(|(_, r)| r).collect())
}

pub fn load_cases(path: impl AsRef<Path>) -> Result<Vec<EpidemicRecord>> {
    let path = path.as_ref();
    let name = path.display().to_string();
    let file = std::fs::File::open(path).map_err(|e| io_error(&name, e))?;
    read_cases(file, &name)
}

pub fn read_occupancy<R: Read>(
    reader: R,
    source: &str,
    unit: OccupancyUnit,
) -> Result<Vec<OccupancyRecord>> {
    let rows = read_table(reader, source, &["date", "occupancy"], |line, rec| {
        let raw: f64 = parse_field(source, line, "occupancy", &rec[1])?;
        let value = match unit {
            OccupancyUnit::Fraction => raw,
            OccupancyUnit::Percent => raw / 100.0,
        };
        if !(0.0..=1.0).contains(&value) {
            return Err(parse_error(
                source,
                line,
                format!("occupancy {raw} is out of range for unit {unit}"),
            ));
        }
        Ok((
            line,
            OccupancyRecord {
                date: parse_date(source, line, &rec[0])?,
                occupancy: value,
            },
        ))
    })?;
    check_order(
        source,
        &rows.iter().map(|(l, r)| (*l, r.date)).collect::<Vec<_>>(),
    )?;
    Ok(rows.into_iter().map(|(_, r)| r).collect())
}

pub fn load_occupancy(path: impl AsRef<Path>, unit: OccupancyUnit) -> Result<Vec<OccupancyRecord>> {
    let path = path.as_ref();
    let name = path.display().to_string();
    let file = std::fs::File::open(path).map_err(|e| io_error(&name, e))?;
    read_occupancy(file, &name, unit)
}

/// Day-indexed, gap-free series of compartments and bed occupancy.
///
/// Day `t` is the calendar date `anchor + t`; `t` may be negative. For
/// ingested data `S_t = N − I_t − R_t`, so `S_t + I_t + R_t = N` on every day.
/// Datasets built from model trajectories carry the simulated `S_t` instead,
/// and their total varies from day to day.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    anchor: NaiveDate,
    population: f64,
    start: i64,
    susceptible: Vec<f64>,
    infected: Vec<f64>,
    recovered: Vec<f64>,
    occupancy: Vec<f64>,
    fills: Vec<OccupancyFill>,
}

impl Dataset {
    /// Assembles a dataset from columns starting at day `start`.
    pub fn from_columns(
        anchor: NaiveDate,
        population: f64,
        start: i64,
        susceptible: Vec<f64>,
        infected: Vec<f64>,
        recovered: Vec<f64>,
        occupancy: Vec<f64>,
    ) -> Result<Self> {
        let len = susceptible.len();
        if len == 0 {
            return Err(Error::invalid("dataset", "no days"));
        }
        if infected.len() != len || recovered.len() != len || occupancy.len() != len {
            return Err(Error::invalid("dataset", "columns differ in length"));
        }
        if population.is_nan() || population <= 0.0 || population.is_infinite() {
            return Err(Error::invalid("population", "must be positive"));
        }
        for k in 0..len {
            let day = start + k as i64;
            let state = CompartmentState {
                susceptible: susceptible[k],
                infected: infected[k],
                recovered: recovered[k],
            };
            CompartmentState::new(state.susceptible, state.infected, state.recovered).map_err(
                |_| Error::InvariantViolation {
                    date: anchor + Duration::days(day),
                    message: format!("negative or non-finite compartment on day {day}"),
                },
            )?;
            if !(0.0..=1.0).contains(&occupancy[k]) {
                return Err(Error::InvariantViolation {
                    date: anchor + Duration::days(day),
                    message: format!("occupancy {} outside [0, 1]", occupancy[k]),
                });
            }
        }
        Ok(Self {
            anchor,
            population,
            start,
            susceptible,
            infected,
            recovered,
            occupancy,
            fills: Vec::new(),
        })
    }

    /// Wraps a simulated trajectory; `occupancy[k]` is the occupancy on day
    /// `trajectory.start + k`, one value per state.
    pub fn from_trajectory(
        trajectory: &Trajectory,
        occupancy: &[f64],
        anchor: NaiveDate,
        population: f64,
    ) -> Result<Self> {
        if occupancy.len() != trajectory.states.len() {
            return Err(Error::invalid(
                "occupancy",
                "needs one value per trajectory state",
            ));
        }
        let states = &trajectory.states;
        Self::from_columns(
            anchor,
            population,
            trajectory.start,
            states.iter().map(|s| s.susceptible).collect(),
            states.iter().map(|s| s.infected).collect(),
            states.iter().map(|s| s.recovered).collect(),
            occupancy.to_vec(),
        )
    }

    pub fn anchor(&self) -> NaiveDate {
        self.anchor
    }

    pub fn population(&self) -> f64 {
        self.population
    }

    /// First covered day.
    pub fn start(&self) -> i64 {
        self.start
    }

    /// Last covered day.
    pub fn end(&self) -> i64 {
        self.start + self.susceptible.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.susceptible.len()
    }

    pub fn is_empty(&self) -> bool {
        self.susceptible.is_empty()
    }

    fn index(&self, day: i64) -> Option<usize> {
        usize::try_from(day - self.start)
            .ok()
            .filter(|&k| k < self.len())
    }

    pub fn contains(&self, day: i64) -> bool {
        self.index(day).is_some()
    }

    pub fn state(&self, day: i64) -> Option<CompartmentState> {
        self.index(day).map(|k| CompartmentState {
            susceptible: self.susceptible[k],
            infected: self.infected[k],
            recovered: self.recovered[k],
        })
    }

    pub fn occupancy(&self, day: i64) -> Option<f64> {
        self.index(day).map(|k| self.occupancy[k])
    }

    /// `S_t + I_t + R_t`.
    pub fn total(&self, day: i64) -> Option<f64> {
        self.state(day).map(|s| s.total())
    }

    pub fn date(&self, day: i64) -> NaiveDate {
        self.anchor + Duration::days(day)
    }

    pub fn day_of(&self, date: NaiveDate) -> i64 {
        (date - self.anchor).num_days()
    }

    /// Occupancy values that were forward-filled during ingestion.
    pub fn fills(&self) -> &[OccupancyFill] {
        &self.fills
    }

    /// Same data with `anchor` as day 0.
    pub fn with_anchor(&self, anchor: NaiveDate) -> Result<Self> {
        let first = self.date(self.start);
        let last = self.date(self.end());
        if anchor < first || anchor > last {
            return Err(Error::AnchorOutOfRange {
                anchor,
                first,
                last,
            });
        }
        Ok(Self {
            anchor,
            start: self.start - (anchor - self.anchor).num_days(),
            ..self.clone()
        })
    }

    /// Writes `t,date,S,I,R,rho`. Values use the shortest representation
    /// that reads back to the same `f64`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| io_error("dataset", e);
        out.write_record(["t", "date", "S", "I", "R", "rho"])
            .map_err(io)?;
        for day in self.start..=self.end() {
            let k = self.index(day).expect("day in range");
            out.write_record([
                day.to_string(),
                self.date(day).format(DATE_FORMAT).to_string(),
                self.susceptible[k].to_string(),
                self.infected[k].to_string(),
                self.recovered[k].to_string(),
                self.occupancy[k].to_string(),
            ])
            .map_err(io)?;
        }
        out.flush().map_err(|e| io_error("dataset", e))
    }

    /// Reads the format produced by [`Dataset::write_csv`]. The nominal
    /// population is taken as the first day's total.
    pub fn read_csv<R: Read>(reader: R, source: &str) -> Result<Self> {
        let rows = read_table(
            reader,
            source,
            &["t", "date", "S", "I", "R", "rho"],
            |line, rec| {
                Ok((
                    line,
                    parse_field::<i64>(source, line, "t", &rec[0])?,
                    parse_date(source, line, &rec[1])?,
                    [
                        parse_field::<f64>(source, line, "S", &rec[2])?,
                        parse_field::<f64>(source, line, "I", &rec[3])?,
                        parse_field::<f64>(source, line, "R", &rec[4])?,
                        parse_field::<f64>(source, line, "rho", &rec[5])?,
                    ],
                ))
            },
        )?;
        let Some(&(_, start, first_date, _)) = rows.first() else {
            return Err(parse_error(source, 1, "dataset has no rows"));
        };
        let anchor = first_date - Duration::days(start);
        for (k, (line, t, date, _)) in rows.iter().enumerate() {
            if *t != start + k as i64 {
                return Err(parse_error(
                    source,
                    *line,
                    format!("day {t} breaks the contiguous index"),
                ));
            }
            if *date != anchor + Duration::days(*t) {
                return Err(parse_error(
                    source,
                    *line,
                    format!("date {date} does not match day {t}"),
                ));
            }
        }
        let column = |j: usize| rows.iter().map(|r| r.3[j]).collect::<Vec<f64>>();
        let (s, i, r) = (column(0), column(1), column(2));
        let population = s[0] + i[0] + r[0];
        Self::from_columns(anchor, population, start, s, i, r, column(3))
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let name = path.display().to_string();
        let file = std::fs::File::open(path).map_err(|e| io_error(&name, e))?;
        Self::read_csv(file, &name)
    }
}

fn dates_between(first: NaiveDate, last: NaiveDate) -> impl Iterator<Item = NaiveDate> {
    first.iter_days().take_while(move |d| *d <= last)
}

/// Aligns case and occupancy records on their common date range and indexes
/// days from `anchor`.
///
/// Case data must be gap-free over the range. Runs of up to
/// [`MAX_OCCUPANCY_FILL`] missing occupancy days are filled with the last
/// observed value and logged in [`Dataset::fills`]; longer runs are an error.
pub fn build_dataset(
    cases: &[EpidemicRecord],
    occupancy: &[OccupancyRecord],
    anchor: NaiveDate,
    population: u64,
) -> Result<Dataset> {
    let (Some(case_first), Some(case_last)) = (cases.first(), cases.last()) else {
        return Err(Error::CoverageGap {
            series: "cases",
            missing: vec![anchor],
        });
    };
    let (Some(occ_first), Some(occ_last)) = (occupancy.first(), occupancy.last()) else {
        return Err(Error::CoverageGap {
            series: "occupancy",
            missing: vec![anchor],
        });
    };
    let first = case_first.date.max(occ_first.date);
    let last = case_last.date.min(occ_last.date);
    if first > last {
        return Err(Error::CoverageGap {
            series: "occupancy",
            missing: dates_between(case_first.date, case_last.date).collect(),
        });
    }
    if anchor < first || anchor > last {
        return Err(Error::AnchorOutOfRange {
            anchor,
            first,
            last,
        });
    }

    let case_by_date: BTreeMap<NaiveDate, &EpidemicRecord> =
        cases.iter().map(|r| (r.date, r)).collect();
    let occ_by_date: BTreeMap<NaiveDate, f64> =
        occupancy.iter().map(|r| (r.date, r.occupancy)).collect();

    let missing_cases: Vec<NaiveDate> = dates_between(first, last)
        .filter(|d| !case_by_date.contains_key(d))
        .collect();
    if !missing_cases.is_empty() {
        return Err(Error::CoverageGap {
            series: "cases",
            missing: missing_cases,
        });
    }

    let mut susceptible = Vec::new();
    let mut infected = Vec::new();
    let mut recovered = Vec::new();
    let mut rho = Vec::new();
    let mut fills = Vec::new();
    let mut too_long = Vec::new();
    let mut run: Vec<NaiveDate> = Vec::new();
    // `first` always has an occupancy observation.
    let mut last_seen = (first, 0.0);

    for date in dates_between(first, last) {
        let rec = case_by_date[&date];
        let sick_or_recovered = rec.infected.checked_add(rec.recovered);
        if sick_or_recovered.is_none_or(|n| n > population) {
            return Err(Error::InvariantViolation {
                date,
                message: format!(
                    "infected {} + recovered {} exceeds population {population}",
                    rec.infected, rec.recovered
                ),
            });
        }
        susceptible.push((population - rec.infected - rec.recovered) as f64);
        infected.push(rec.infected as f64);
        recovered.push(rec.recovered as f64);

        match occ_by_date.get(&date) {
            Some(&value) => {
                if run.len() > MAX_OCCUPANCY_FILL {
                    too_long.append(&mut run);
                }
                run.clear();
                last_seen = (date, value);
                rho.push(value);
            }
            None => {
                run.push(date);
                fills.push(OccupancyFill {
                    date,
                    source: last_seen.0,
                    value: last_seen.1,
                });
                rho.push(last_seen.1);
            }
        }
    }
    // `last` also has an observation, so no run is left open here.
    debug_assert!(run.is_empty());
    if !too_long.is_empty() {
        return Err(Error::CoverageGap {
            series: "occupancy",
            missing: too_long,
        });
    }

    let start = (first - anchor).num_days();
    let mut dataset = Dataset::from_columns(
        anchor,
        population as f64,
        start,
        susceptible,
        infected,
        recovered,
        rho,
    )?;
    dataset.fills = fills;
    Ok(dataset)
}
