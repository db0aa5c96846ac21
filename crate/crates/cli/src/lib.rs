//! Experiment runner library behind the `muweyl` binary: strict TOML
//! configs, deterministic CSV rendering, and fixture comparison.

pub mod config;
pub mod fixture;
pub mod runner;
pub mod selftest;

use std::fmt;

/// Process-level failure classes; [`CliError::exit_code`] fixes the exit
/// status contract (0 pass, 1 usage, 2 fixture mismatch, 3 internal).
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Mismatch(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Mismatch(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Mismatch(msg) => write!(f, "fixture mismatch:\n{msg}"),
            CliError::Internal(msg) => write!(f, "internal error: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}
