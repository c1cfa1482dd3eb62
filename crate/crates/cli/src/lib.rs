//! Command-line front end for freshlink: socket-mode leader and follower,
//! simulation sweeps and metric reports.

pub mod config;
pub mod metrics_csv;
pub mod socket;
pub mod summary;
pub mod sweep;

use thiserror::Error;

/// CLI failure; the variant decides the process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("runtime: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl From<config::ConfigError> for CliError {
    fn from(e: config::ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<metrics_csv::CsvError> for CliError {
    fn from(e: metrics_csv::CsvError) -> Self {
        match e {
            metrics_csv::CsvError::Io { .. } => CliError::Runtime(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}
