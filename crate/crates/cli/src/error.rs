use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, config file contents or names. Exit code 2.
    #[error("configuration error: {0}")]
    Config(String),

    /// Failure while running or writing results. Exit code 3.
    #[error("runtime error: {0}")]
    Runtime(String),

    #[error(transparent)]
    Core(#[from] lagvar::Error),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(lagvar::Error::UnknownKernel(_) | lagvar::Error::InvalidBandwidth(_)) => 2,
            _ => 3,
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io { path: path.as_ref().display().to_string(), source }
    }
}
