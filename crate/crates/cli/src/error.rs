use std::fmt;

use ppkm_core::ErrorKind;
use serde::Serialize;

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

/// Error reported to the user as a JSON object on stderr.
#[derive(Debug, Clone, Serialize)]
pub struct CliError {
    pub code: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub day: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<u64>,
    #[serde(skip)]
    pub exit_code: i32,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: "UsageError".into(),
            message: message.into(),
            day: None,
            line: None,
            exit_code: EXIT_USAGE,
        }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self {
            code: "ConfigError".into(),
            ..Self::usage(message)
        }
    }

    pub fn io(path: &std::path::Path, err: impl fmt::Display) -> Self {
        Self {
            code: "IoError".into(),
            message: format!("{}: {err}", path.display()),
            day: None,
            line: None,
            exit_code: EXIT_DATA,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self }).to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

impl From<ppkm_core::Error> for CliError {
    fn from(err: ppkm_core::Error) -> Self {
        let exit_code = match err.kind() {
            ErrorKind::Input => EXIT_USAGE,
            ErrorKind::Data => EXIT_DATA,
            ErrorKind::Numeric => EXIT_NUMERIC,
        };
        Self {
            code: err.code().into(),
            message: err.to_string(),
            day: err.day(),
            line: err.line(),
            exit_code,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
