use std::fmt;
use std::process::ExitCode;

use lancer_core::Error as CoreError;

/// Failure classes with distinct process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed, incomplete or contradictory run configuration.
    Config,
    /// Missing, malformed or mismatched dataset and checkpoint files.
    Data,
    /// Non-finite values, non-convergence and other numerical failures.
    Numerical,
    /// File system failures.
    Io,
}

impl ErrorKind {
    pub fn exit_code(self) -> u8 {
        match self {
            ErrorKind::Config => 2,
            ErrorKind::Data => 3,
            ErrorKind::Numerical => 4,
            ErrorKind::Io => 5,
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ErrorKind,
    pub source: anyhow::Error,
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn new(kind: ErrorKind, source: impl Into<anyhow::Error>) -> Self {
        CliError {
            kind,
            source: source.into(),
        }
    }

    pub fn config(msg: impl fmt::Display) -> Self {
        Self::new(ErrorKind::Config, anyhow::anyhow!("{msg}"))
    }

    pub fn data(msg: impl fmt::Display) -> Self {
        Self::new(ErrorKind::Data, anyhow::anyhow!("{msg}"))
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.kind.exit_code())
    }

    pub fn context(self, msg: impl fmt::Display + Send + Sync + 'static) -> Self {
        CliError {
            kind: self.kind,
            source: self.source.context(msg),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.source)
    }
}

impl std::error::Error for CliError {}

fn core_kind(e: &CoreError) -> ErrorKind {
    match e {
        CoreError::Numerical(_) | CoreError::NotConverged { .. } => ErrorKind::Numerical,
        CoreError::Io(_) => ErrorKind::Io,
        CoreError::AtInstance { source, .. } => core_kind(source),
        _ => ErrorKind::Data,
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::new(core_kind(&e), e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::new(ErrorKind::Io, e)
    }
}

/// Attaches context to fallible calls, keeping the error class.
pub trait Context<T> {
    fn ctx(self, msg: impl fmt::Display + Send + Sync + 'static) -> CliResult<T>;
}

impl<T, E: Into<CliError>> Context<T> for std::result::Result<T, E> {
    fn ctx(self, msg: impl fmt::Display + Send + Sync + 'static) -> CliResult<T> {
        self.map_err(|e| e.into().context(msg))
    }
}
