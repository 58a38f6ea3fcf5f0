//! Experiment harness for the timing-speculation cache simulator: named
//! experiments with deterministic seeds, CSV reports, and minimal SVG
//! plots.

// `!(x > 0.0)` deliberately rejects NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod csv;
pub mod svg;

use std::fmt;

/// Process exit codes.
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INGESTION: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

/// Harness-level error carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub exit_code: i32,
    pub message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn config(message: String) -> Self {
        Self {
            exit_code: EXIT_CONFIG,
            message,
        }
    }

    pub fn internal(message: String) -> Self {
        Self {
            exit_code: EXIT_INTERNAL,
            message,
        }
    }

    /// A core error raised while interpreting configuration.
    pub fn from_config_err(e: tscache_core::Error) -> Self {
        Self {
            exit_code: EXIT_CONFIG,
            message: e.to_string(),
        }
    }
}

impl From<tscache_core::Error> for CliError {
    fn from(e: tscache_core::Error) -> Self {
        let exit_code = match &e {
            tscache_core::Error::Ingestion { .. } => EXIT_INGESTION,
            tscache_core::Error::Parameter(_) | tscache_core::Error::Lookup(_) => EXIT_CONFIG,
        };
        Self {
            exit_code,
            message: e.to_string(),
        }
    }
}

/// One produced artifact: file name and exact bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn new(name: &str, bytes: Vec<u8>) -> Self {
        Self {
            name: name.to_string(),
            bytes,
        }
    }
}
