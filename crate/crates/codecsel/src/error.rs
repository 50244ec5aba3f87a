//! Error type and exit statuses.

use std::path::PathBuf;

use codecsel_core::Error as CoreError;

/// Process exit statuses.
pub mod exit {
    /// A certificate was produced.
    pub const CERTIFIED: i32 = 0;
    /// The run completed without a certificate.
    pub const NOT_CERTIFIED: i32 = 1;
    /// Invalid configuration or parameters.
    pub const CONFIG: i32 = 2;
    /// Unreadable, malformed or unsuitable input data.
    pub const INPUT: i32 = 3;
}

/// Errors raised by the command-line layer.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Invalid configuration value or combination.
    #[error("configuration error: {0}")]
    Config(String),
    /// Malformed input data.
    #[error("input error: {0}")]
    Input(String),
    /// File system failure.
    #[error("cannot access {}: {source}", path.display())]
    Io {
        /// Path involved.
        path: PathBuf,
        /// Underlying error.
        source: std::io::Error,
    },
    /// Error from the selection library.
    #[error(transparent)]
    Core(#[from] CoreError),
}

impl CliError {
    /// Exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => exit::CONFIG,
            CliError::Core(CoreError::Parameter { .. } | CoreError::Config(_)) => exit::CONFIG,
            CliError::Input(_) | CliError::Io { .. } | CliError::Core(_) => exit::INPUT,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}
