//! Experiment runner for the `qst` command line tool.
//!
//! Each experiment turns a config section into typed rows, a CSV table and
//! a few summary lines. CSV bytes depend only on the resolved config.

pub mod cli;
pub mod config;
pub mod eval;
pub mod fig2;
pub mod fig3;
pub mod sweep;
pub mod table;
pub mod verify;

use config::ConfigError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("tolerance check failed: {0}")]
    Tolerance(String),
    #[error(transparent)]
    Core(#[from] qst_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Tolerance(_) => 3,
            _ => 1,
        }
    }
}
