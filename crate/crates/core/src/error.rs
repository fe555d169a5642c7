use chrono::NaiveDate;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Broad class of an error, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Input,
    Data,
    Numeric,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("negative {compartment} compartment ({value}) on day {day}")]
    NegativeCompartment {
        day: i64,
        compartment: &'static str,
        value: f64,
    },

    #[error("empty rates schedule")]
    EmptySchedule,

    #[error("missing data for day {day}: {what}")]
    MissingData { day: i64, what: &'static str },

    #[error("degenerate system for day {day}: the {column} column is identically zero")]
    DegenerateSystem { day: i64, column: &'static str },

    #[error("singular normal equations")]
    SingularNormalEquations,

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: u64,
        message: String,
    },

    #[error("{path}:{line}: duplicate date {date}")]
    DuplicateDate {
        path: String,
        line: u64,
        date: NaiveDate,
    },

    #[error("{path}:{line}: date {date} is earlier than the preceding row")]
    NonMonotoneDate {
        path: String,
        line: u64,
        date: NaiveDate,
    },

    #[error("invariant violated on {date}: {message}")]
    InvariantViolation { date: NaiveDate, message: String },

    #[error("coverage gap in {series} data: missing {missing:?}")]
    CoverageGap {
        series: &'static str,
        missing: Vec<NaiveDate>,
    },

    #[error("anchor date {anchor} is outside the covered range {first}..={last}")]
    AnchorOutOfRange {
        anchor: NaiveDate,
        first: NaiveDate,
        last: NaiveDate,
    },

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "InvalidParameter",
            Error::NegativeCompartment { .. } => "NegativeCompartment",
            Error::EmptySchedule => "EmptySchedule",
            Error::MissingData { .. } => "MissingData",
            Error::DegenerateSystem { .. } => "DegenerateSystem",
            Error::SingularNormalEquations => "SingularNormalEquations",
            Error::Parse { .. } => "ParseError",
            Error::DuplicateDate { .. } => "DuplicateDate",
            Error::NonMonotoneDate { .. } => "NonMonotoneDate",
            Error::InvariantViolation { .. } => "InvariantViolation",
            Error::CoverageGap { .. } => "CoverageGap",
            Error::AnchorOutOfRange { .. } => "AnchorOutOfRange",
            Error::Io { .. } => "IoError",
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidParameter { .. } | Error::EmptySchedule => ErrorKind::Input,
            Error::NegativeCompartment { .. }
            | Error::DegenerateSystem { .. }
            | Error::SingularNormalEquations => ErrorKind::Numeric,
            _ => ErrorKind::Data,
        }
    }

    /// Day index the error refers to, when there is one.
    pub fn day(&self) -> Option<i64> {
        match self {
            Error::NegativeCompartment { day, .. }
            | Error::MissingData { day, .. }
            | Error::DegenerateSystem { day, .. } => Some(*day),
            _ => None,
        }
    }

    /// Input line the error refers to, when there is one.
    pub fn line(&self) -> Option<u64> {
        match self {
            Error::Parse { line, .. }
            | Error::DuplicateDate { line, .. }
            | Error::NonMonotoneDate { line, .. } => Some(*line),
            _ => None,
        }
    }

    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
