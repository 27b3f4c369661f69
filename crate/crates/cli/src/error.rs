use std::path::PathBuf;

use crate::config::Mode;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{mode}: {source}")]
    Core {
        mode: Mode,
        #[source]
        source: volterra_core::Error,
    },
    #[error("{0}")]
    Usage(String),
}

pub(crate) trait Context<T> {
    fn in_mode(self, mode: Mode) -> Result<T, CliError>;
}

impl<T> Context<T> for volterra_core::Result<T> {
    fn in_mode(self, mode: Mode) -> Result<T, CliError> {
        self.map_err(|source| CliError::Core { mode, source })
    }
}
