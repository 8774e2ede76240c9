//! Scenario runner behind the `rabsim` binary: configuration resolution,
//! scenario execution and CSV/JSON output.

pub mod config;
pub mod output;
pub mod run;

use std::fmt;

pub use config::{parse_config, parse_config_file, RawConfig, Scenario, ScenarioConfig};
pub use run::{run_scenario, RunSummary};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_HEALTH: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// One message per offending field.
    Validation(Vec<String>),
    Health(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Health(_) => EXIT_HEALTH,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(msgs) => {
                writeln!(f, "invalid configuration:")?;
                for m in msgs {
                    writeln!(f, "  {m}")?;
                }
                Ok(())
            }
            CliError::Health(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "I/O error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<rabsim::Error> for CliError {
    fn from(e: rabsim::Error) -> Self {
        use rabsim::Error::*;
        match e {
            IntegratorHealth { .. } | QuadratureResolution { .. } => CliError::Health(e.to_string()),
            _ => CliError::Validation(vec![e.to_string()]),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
