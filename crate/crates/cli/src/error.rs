use std::fmt;

use chainstate_core::Error;

/// Failure classes, each with its own exit status.
#[derive(Debug)]
pub enum CliError {
    /// Invalid configuration, arguments or input schema.
    Config(String),
    Io(String),
    Numerical(String),
    /// Reproduction checks that did not pass.
    ChecksFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ChecksFailed(_) => 1,
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Io(m) => write!(f, "I/O error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::ChecksFailed(n) => write!(f, "{n} check(s) failed"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Io(_) => CliError::Io(msg),
            Error::NormViolation { .. }
            | Error::Eigensolver(_)
            | Error::NoArrival { .. }
            | Error::IncompleteExtraction(_)
            | Error::Conditioning { .. }
            | Error::Infeasible { .. }
            | Error::NotConverged { .. } => CliError::Numerical(msg),
            _ => CliError::Config(msg),
        }
    }
}
