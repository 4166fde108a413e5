//! Configuration, command implementations and report writing behind the
//! `evidence-testbed` binary.
//!
//! Exit codes: 0 success, 1 invariant or selftest failure, 2 configuration
//! or input error.

use thiserror::Error;

pub mod commands;
pub mod config;
pub mod manifest;
pub mod report;
pub mod selftest;

pub use commands::{cmd_curve, cmd_evaluate, cmd_optimal, CommandOutput};
pub use config::{Comparator, ExperimentConfig, GuessingMethod, TableSource};
pub use manifest::RunManifest;
pub use report::{fmt_sig, ResultRow, RESULT_HEADER};
pub use selftest::{cmd_selftest, SelftestReport};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("input error: {0}")]
    Input(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Invariant(_) => 1,
            HarnessError::Config(_) | HarnessError::Input(_) | HarnessError::Io(_) => 2,
        }
    }
}
