//! Front end for `mzi-core`: argument and config-file handling, the four
//! batch commands and their CSV/JSON writers.
//!
//! Exit codes are grouped by failure class, see [`ExitKind`].

// Negated comparisons reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod commands;
pub mod config;
pub mod output;

use std::fmt;

/// Process exit status by failure class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Success = 0,
    /// Bad flags, config file entries or grid, or parameters rejected by
    /// the core library.
    InvalidConfig = 2,
    Io = 3,
    /// The signal never reaches half maximum.
    NoCrossing = 4,
    /// Too many inversion failures, or a divergent predicted spread.
    EstimatorAbort = 5,
    /// `--check` found an invariant violation.
    CheckFailed = 6,
}

impl ExitKind {
    pub fn code(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub kind: ExitKind,
    pub message: String,
}

impl CliError {
    pub fn new(kind: ExitKind, message: impl Into<String>) -> Self {
        Self {
            kind,
            message: message.into(),
        }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self::new(ExitKind::InvalidConfig, message)
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self::new(ExitKind::Io, message)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}
