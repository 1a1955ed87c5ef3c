//! Library backing the `fermat-mirror` binary: JSON emission, input-file
//! parsing, the subcommand implementations, and the consolidated check
//! battery run by `check-suite` and by the acceptance tests.
//!
//! Every command produces a JSON document with a versioned schema header
//! and exact values as numerator/denominator strings; only the elliptic
//! layer emits decimals. Exit codes: 0 on success, 1 when a verification
//! subcommand finds a nonzero residual, 2 on configuration errors.

pub mod emit;
pub mod input;
pub mod run;
pub mod suite;

use serde_json::Value;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unusable input data, or a file problem. Exit code 2.
    Config(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for CliError {}

/// A finished command: the JSON document plus whether every verification
/// it performed passed. Commands that only report data always pass.
pub struct Outcome {
    pub document: Value,
    pub passed: bool,
}

impl Outcome {
    pub fn report(document: Value) -> Self {
        Outcome { document, passed: true }
    }

    pub fn checked(document: Value, passed: bool) -> Self {
        Outcome { document, passed }
    }
}
