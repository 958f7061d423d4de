use std::process::ExitCode;

use rst_core::Error;

/// A failed run, classified by exit status.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Resource(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Config(_) => 2,
            CliError::Resource(_) => 3,
            CliError::Numerical(_) => 4,
        })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Resource(_) => "resource",
            CliError::Numerical(_) => "numerical",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Resource(m) | CliError::Numerical(m) => m,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} error: {}", self.kind(), self.message())
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::InvalidDimension { .. }
            | Error::DimensionMismatch { .. }
            | Error::Spec(_)
            | Error::Contract(_)
            | Error::Nyquist { .. }
            | Error::Unsupported(_)
            | Error::Parse(_) => CliError::Config(msg),
            Error::Resource(_) | Error::Io { .. } => CliError::Resource(msg),
            Error::Truncation { .. } | Error::Domain { .. } | Error::NoSolution { .. } | Error::Divergence { .. } => {
                CliError::Numerical(msg)
            }
        }
    }
}
