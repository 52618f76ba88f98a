//! Configuration-driven experiments on top of [`stablim`]: parse a TOML
//! study, run its tasks, write CSV and text reports.

use std::io;
use std::path::PathBuf;

pub mod acceptance;
pub mod catalog;
pub mod config;
pub mod run;

pub use config::{ExperimentConfig, Options, Sizes, Task};
pub use run::{run_config, run_file, RunOptions, RunOutcome, VerdictLine};

/// Exit status when every verdict passes.
pub const EXIT_PASS: u8 = 0;
/// Exit status when a verdict fails or a task cannot be evaluated.
pub const EXIT_VERDICT: u8 = 1;
/// Exit status for usage, parse and validation errors.
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}", path = path.display())]
    Read { path: PathBuf, source: io::Error },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("cannot write {path}: {source}", path = path.display())]
    Write { path: PathBuf, source: io::Error },

    #[error("task {task} failed: {source}")]
    Task {
        task: &'static str,
        source: stablim::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Task { .. } => EXIT_VERDICT,
            _ => EXIT_USAGE,
        }
    }
}
