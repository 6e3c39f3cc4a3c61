use std::path::PathBuf;

use crate::config::ConfigError;

/// Exit status of a successful run.
pub const EXIT_OK: u8 = 0;
/// Unreadable output location or failed write.
pub const EXIT_IO: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_DIVERGENCE: u8 = 3;
pub const EXIT_NUMERICAL: u8 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),

    #[error("invalid argument: {0}")]
    Usage(String),

    /// Failure inside a library module, tagged with that module's name.
    #[error("{module}: {source}")]
    Core {
        module: &'static str,
        #[source]
        source: globalprop::Error,
    },

    #[error("cannot write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use globalprop::Error as E;
        match self {
            CliError::Config(_) | CliError::Usage(_) => EXIT_CONFIG,
            CliError::Io { .. } => EXIT_IO,
            CliError::Core { source, .. } => match source {
                E::Config(_) | E::Domain(_) | E::Diagnostics(_) => EXIT_CONFIG,
                E::Divergence { .. } | E::Singular { .. } => EXIT_DIVERGENCE,
                E::Degenerate(_) | E::ModelSpaceBreakdown { .. } | E::Numerical(_) => EXIT_NUMERICAL,
            },
        }
    }
}

/// Attaches a module name to library errors.
pub(crate) trait InModule<T> {
    fn in_module(self, module: &'static str) -> Result<T, CliError>;
}

impl<T> InModule<T> for globalprop::Result<T> {
    fn in_module(self, module: &'static str) -> Result<T, CliError> {
        self.map_err(|source| CliError::Core { module, source })
    }
}
