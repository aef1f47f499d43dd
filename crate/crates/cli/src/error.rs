use std::process::ExitCode;

use isoflag_core::Error;

/// Failure classes, each with its own exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unknown names, malformed files, non-regular q: status 2.
    Input(String),
    /// A computation did not reach its tolerance: status 3.
    Numerical(String),
    /// A verification suite reported a failing check: status 4.
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Verification(_) => 4,
        })
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Verification(m) => write!(f, "verification failed: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvariantViolation { .. } | Error::WeylOverflow(_) | Error::NotCritical(_) | Error::Numerical(_) => {
                CliError::Numerical(e.to_string())
            }
            _ => CliError::Input(e.to_string()),
        }
    }
}
