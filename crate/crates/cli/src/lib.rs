//! Command-line front end for the bitop laboratory: config ingestion, the
//! verification suite and the report writers behind the `bitop` binary.

pub mod checks;
pub mod commands;
pub mod config;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] bitop_core::Error),
}

/// Exit status for a run that failed before any check could be judged.
pub const EXIT_ERROR: i32 = 2;
/// Exit status when at least one check failed.
pub const EXIT_CHECK_FAILED: i32 = 1;
