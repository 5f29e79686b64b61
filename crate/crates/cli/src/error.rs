use std::fmt;

use reverse_shannon::Error;

/// Process exit status categories.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitKind {
    Validation,
    NoConvergence,
    Certification,
    Io,
}

impl ExitKind {
    pub fn code(self) -> i32 {
        match self {
            ExitKind::Validation => 2,
            ExitKind::NoConvergence => 3,
            ExitKind::Certification => 4,
            ExitKind::Io => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CliError {
    pub kind: ExitKind,
    pub message: String,
}

impl CliError {
    pub fn validation(msg: impl Into<String>) -> Self {
        Self { kind: ExitKind::Validation, message: msg.into() }
    }

    pub fn io(msg: impl Into<String>) -> Self {
        Self { kind: ExitKind::Io, message: msg.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let kind = match e {
            Error::NoConvergence { .. } => ExitKind::NoConvergence,
            Error::Certification(_) | Error::PartitionSearch { .. } => ExitKind::Certification,
            _ => ExitKind::Validation,
        };
        Self { kind, message: e.to_string() }
    }
}
