//! `qfb` command implementations. Each command returns its stdout text and exit code;
//! `main` only prints.
//!
//! Output convention: with `--output PATH` the CSV goes to `PATH` and a one-line JSON
//! summary to stdout; without it the CSV goes to stdout. `check` always prints JSON.

pub mod args;
pub mod commands;
pub mod network;
pub mod textfile;

use qfb_gw::GwError;
use std::fmt;

/// Failure classes with their process exit codes.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad arguments, parameter files or I/O: exit 2.
    Config(String),
    /// Numerical guard tripped (conditioning, poles, non-convergence): exit 3.
    Guard(String),
    /// Riccati equation without a stabilizing solution: exit 4.
    Care(String),
    /// Controllability or observability rank deficiency: exit 5.
    Rank(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Guard(_) => 3,
            CliError::Care(_) => 4,
            CliError::Rank(_) => 5,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Guard(m) => write!(f, "numeric guard: {m}"),
            CliError::Care(m) => write!(f, "CARE failure: {m}"),
            CliError::Rank(m) => write!(f, "rank deficiency: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<qfb_core::Error> for CliError {
    fn from(e: qfb_core::Error) -> Self {
        use qfb_core::Error as E;
        match e {
            E::Parameter(_) | E::Dimension(_) | E::Signature(_) | E::IdealUndefined(_) | E::NyquistPrecondition(_) => {
                CliError::Config(e.to_string())
            }
            E::CareNotSolvable(_) => CliError::Care(e.to_string()),
            _ => CliError::Guard(e.to_string()),
        }
    }
}

impl From<GwError> for CliError {
    fn from(e: GwError) -> Self {
        match e {
            GwError::Config(_) => CliError::Config(e.to_string()),
            GwError::Core(c) => c.into(),
            GwError::RankDeficient { .. } => CliError::Rank(e.to_string()),
            GwError::Care { .. } => CliError::Care(e.to_string()),
            GwError::Unstable(_) => CliError::Guard(e.to_string()),
        }
    }
}

/// Text for stdout and the exit code of a completed command.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub stdout: String,
    pub code: i32,
}

pub use commands::run;
