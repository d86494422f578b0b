//! Error-to-exit-code mapping.

use std::fmt;

/// Categorized command error; `Display` renders the single-line
/// machine-parseable form `error[<category>]: <message>`.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }

    fn category(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Data(_) => "data",
            CliError::Numeric(_) => "numeric",
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Numeric(m) => m,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Inner messages may span lines; keep the wire format single-line.
        let msg = self.message().replace('\n', " ");
        write!(f, "error[{}]: {}", self.category(), msg)
    }
}

impl From<homnet::dataio::DataError> for CliError {
    fn from(e: homnet::dataio::DataError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<homnet::split::SplitError> for CliError {
    fn from(e: homnet::split::SplitError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<homnet::checkpoint::CheckpointError> for CliError {
    fn from(e: homnet::checkpoint::CheckpointError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<homnet::history::HistoryError> for CliError {
    fn from(e: homnet::history::HistoryError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<homnet::learn::TrainError> for CliError {
    fn from(e: homnet::learn::TrainError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl From<homnet::models::ModelError> for CliError {
    fn from(e: homnet::models::ModelError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl From<homnet::photonics::PhotonicsError> for CliError {
    fn from(e: homnet::photonics::PhotonicsError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl From<homnet::svgplot::PlotError> for CliError {
    fn from(e: homnet::svgplot::PlotError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

pub fn io_error(path: &std::path::Path, e: std::io::Error) -> CliError {
    CliError::Data(format!("io error on {}: {e}", path.display()))
}
