use std::fmt;
use std::process::ExitCode;

use qdho_core::Error as CoreError;

/// How a run ended, mapped onto the process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    /// Bad config, bad arguments, bad input.
    Validation,
    /// A tolerance or acceptance check did not hold.
    Tolerance,
    /// NaN or infinity appeared in a computation.
    Numeric,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Success => 0,
            Status::Validation => 1,
            Status::Tolerance => 2,
            Status::Numeric => 3,
        }
    }
}

impl From<Status> for ExitCode {
    fn from(s: Status) -> Self {
        ExitCode::from(s.code())
    }
}

#[derive(Debug)]
pub struct CliError {
    pub status: Status,
    pub message: String,
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        Self { status: Status::Validation, message: message.into() }
    }

    pub fn tolerance(message: impl Into<String>) -> Self {
        Self { status: Status::Tolerance, message: message.into() }
    }

    pub fn numeric(message: impl Into<String>) -> Self {
        Self { status: Status::Numeric, message: message.into() }
    }

    /// Prefixes the message with where the error happened.
    pub fn context(mut self, what: impl fmt::Display) -> Self {
        self.message = format!("{what}: {}", self.message);
        self
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let status = match e {
            CoreError::NonFinite => Status::Numeric,
            CoreError::TruncationNotConverged { .. } => Status::Tolerance,
            _ => Status::Validation,
        };
        Self { status, message: e.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::validation(format!("i/o error: {e}"))
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
