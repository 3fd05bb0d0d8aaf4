use thiserror::Error;

/// Errors reported by the model and the configuration layer.
#[derive(Debug, Error)]
pub enum Error {
    /// Parameter set violates a physical constraint.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// No membrane position extinguishes the recycling port for these
    /// mirror amplitudes.
    #[error("no dark port exists: membrane transmission is too large relative to the beam splitter imbalance")]
    NoDarkPort,

    /// Bad key, value or combination in a run configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// Numerical routine failed to converge.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code the command line front end should use.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            _ => 1,
        }
    }
}
