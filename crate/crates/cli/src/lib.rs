//! Command implementations behind the `flyrate` binary.

pub mod commands;
pub mod config;

use thiserror::Error;

pub use config::{parse_algorithms, RunConfig, SeedRange};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "FLYRATE_OUT_DIR";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }

    pub(crate) fn io(what: impl std::fmt::Display, err: std::io::Error) -> Self {
        CliError::Runtime(format!("{what}: {err}"))
    }
}

impl From<flyrate::Error> for CliError {
    fn from(e: flyrate::Error) -> Self {
        use flyrate::Error as E;
        match e {
            E::InvalidConfig { .. } | E::UnknownAlgorithm(_) | E::InvalidMcs(_) => {
                CliError::Config(e.to_string())
            }
            other => CliError::Runtime(other.to_string()),
        }
    }
}
