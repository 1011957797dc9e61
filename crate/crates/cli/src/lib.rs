//! File formats, deterministic JSON output, and command implementations for
//! the `fuzzymc` command line tool.
//!
//! Exit-code contract: 0 on success, 1 on semantic failure (invalid
//! instance, failed validation, failed bound), 2 on I/O or parse failure.

pub mod commands;
pub mod emit;
pub mod formats;
pub mod report;

/// Errors carrying their exit code.
#[derive(Debug)]
pub enum CliError {
    /// I/O problems and malformed JSON: exit 2.
    Input(String),
    /// Semantically invalid inputs or failed checks: exit 1.
    Semantic(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Semantic(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Semantic(m) => m,
        }
    }
}

impl From<fuzzymc::Error> for CliError {
    fn from(err: fuzzymc::Error) -> Self {
        CliError::Semantic(err.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
