use std::path::Path;
use thiserror::Error;

/// Failures mapped onto the process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] orbit_entangle::Error),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// Valid inputs, but every requested evaluation failed.
    #[error("{0}")]
    Numerical(String),

    #[error("{0} corpus row(s) outside tolerance")]
    Breach(usize),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// 1 for bad input, 2 for numerical failure, 3 for a verification breach.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } => 1,
            CliError::Core(e) if e.is_validation() => 1,
            CliError::Core(_) | CliError::Numerical(_) => 2,
            CliError::Breach(_) => 3,
        }
    }
}
