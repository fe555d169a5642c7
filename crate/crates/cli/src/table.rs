//! Tabular outputs, written as CSV or as a JSON array of row objects.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use crate::config::OutputFormat;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Empty,
}

impl Cell {
    fn to_csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            // Shortest representation that parses back to the same value,
            // switching to exponent form for very small or large magnitudes.
            Cell::Float(v) => format!("{v:?}"),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Int(v) => Value::from(*v),
            Cell::Float(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub name: &'static str,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &'static str, header: &[&'static str]) -> Self {
        Self {
            name,
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => {
                let mut out = csv::Writer::from_writer(Vec::new());
                out.write_record(&self.header).expect("in-memory write");
                for row in &self.rows {
                    out.write_record(row.iter().map(Cell::to_csv))
                        .expect("in-memory write");
                }
                String::from_utf8(out.into_inner().expect("in-memory flush")).expect("utf-8 output")
            }
            OutputFormat::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let obj: Map<String, Value> = self
                            .header
                            .iter()
                            .zip(row)
                            .map(|(k, v)| (k.to_string(), v.to_json()))
                            .collect();
                        Value::Object(obj)
                    })
                    .collect();
                let mut text = serde_json::to_string_pretty(&rows).expect("serialisable rows");
                text.push('\n');
                text
            }
        }
    }

    /// Writes `<dir>/<name>.<ext>` and returns its path.
    pub fn write(&self, dir: &Path, format: OutputFormat) -> CliResult<PathBuf> {
        let path = dir.join(format!("{}.{}", self.name, format.extension()));
        write_file(&path, self.render(format).as_bytes())?;
        Ok(path)
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    let mut file = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    file.write_all(bytes).map_err(|e| CliError::io(path, e))
}

/// Reads a headed CSV and returns, per data row, the fields named in
/// `columns` (extra columns are ignored) with their line number.
pub fn read_columns(path: &Path, columns: &[&str]) -> CliResult<Vec<(u64, Vec<String>)>> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file);
    let parse_err = |line: u64, message: String| CliError {
        code: "ParseError".into(),
        message: format!("{}:{line}: {message}", path.display()),
        day: None,
        line: Some(line),
        exit_code: crate::error::EXIT_DATA,
    };
    let header = reader
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    let index: Vec<usize> = columns
        .iter()
        .map(|c| {
            header
                .iter()
                .position(|h| h == *c)
                .ok_or_else(|| parse_err(1, format!("missing column {c:?}")))
        })
        .collect::<CliResult<_>>()?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        rows.push((line, index.iter().map(|&k| record[k].to_owned()).collect()));
    }
    Ok(rows)
}

pub fn parse_cell<T: std::str::FromStr>(
    path: &Path,
    line: u64,
    name: &str,
    text: &str,
) -> CliResult<T>
where
    T::Err: std::fmt::Display,
{
    text.parse().map_err(|e| CliError {
        code: "ParseError".into(),
        message: format!("{}:{line}: bad {name} {text:?}: {e}", path.display()),
        day: None,
        line: Some(line),
        exit_code: crate::error::EXIT_DATA,
    })
}
