//! Command-line front end: reproducible demos, and the solvers and
//! checkers driven by JSON configs.

pub mod commands;
pub mod config;
pub mod demos;
pub mod mappings;

use serde_json::Value;
use thiserror::Error;

pub use demos::{run_demo, DemoId};

pub const EXIT_OK: i32 = 0;
/// Solver did not converge, or a check failed.
pub const EXIT_FAILED: i32 = 1;
/// A demo assertion failed.
pub const EXIT_ASSERTION: i32 = 2;
/// Malformed config or invalid parameters.
pub const EXIT_MALFORMED: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] cstar_fixpoint::Error),
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Copy)]
pub struct Options {
    pub seed: u64,
    /// Overrides `conv_tol`.
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            seed: cstar_fixpoint::sampling::DEFAULT_SEED,
            tol: None,
            max_iter: None,
        }
    }
}

/// Result of a command: JSON for stdout, a summary for stderr, an exit code.
#[derive(Debug)]
pub struct Report {
    pub json: Value,
    pub summary: String,
    pub exit_code: i32,
}

pub fn read_json(path: &std::path::Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(serde_json::from_str(&text)?)
}
