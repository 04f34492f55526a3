use std::io;
use std::path::{Path, PathBuf};

use cyclecast_core::{Error as CoreError, ErrorClass};
use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    /// Malformed or inconsistent input files, with location context.
    #[error("{0}")]
    Data(String),

    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: CoreError,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) | CliError::Io { .. } => 3,
            CliError::Core { source, .. } => match source.class() {
                ErrorClass::Config => 2,
                ErrorClass::Data => 3,
                ErrorClass::Numerical => 4,
            },
        }
    }

    pub fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn csv(path: &Path, err: csv::Error) -> Self {
        let message = format!("{}: {err}", path.display());
        match err.into_kind() {
            csv::ErrorKind::Io(e) => CliError::io(path, e),
            _ => CliError::Data(message),
        }
    }
}

/// Attach context to engine errors.
pub(crate) trait Context<T> {
    fn context(self, what: impl FnOnce() -> String) -> CliResult<T>;
}

impl<T> Context<T> for cyclecast_core::Result<T> {
    fn context(self, what: impl FnOnce() -> String) -> CliResult<T> {
        self.map_err(|source| CliError::Core {
            context: what(),
            source,
        })
    }
}
