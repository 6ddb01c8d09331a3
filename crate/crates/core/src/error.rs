use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Cholesky factorization failed even after escalating diagonal jitter.
    /// `attempted` lists every jitter value that was tried, in order.
    #[error("Cholesky factorization failed after jitter ladder {attempted:?}")]
    CholeskyFailed { attempted: Vec<f64> },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("all optimizer restarts failed: {0}")]
    AllRestartsFailed(String),

    #[error("GP fit failed for space `{space_id}`: {reason}")]
    FitFailed { space_id: String, reason: String },

    /// Every likelihood-reweighting sample had zero posterior mass.
    #[error("all {n_samples} parameter samples from {prior} prior had zero likelihood")]
    AllWeightsInvalid { prior: String, n_samples: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("failed to load `{path}`: {reason}")]
    Load { path: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid_argument(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Stable machine-readable tag for CLI error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid_argument",
            Error::CholeskyFailed { .. } => "numerical",
            Error::InsufficientData(_) => "insufficient_data",
            Error::DegenerateData(_) => "degenerate_data",
            Error::AllRestartsFailed(_) => "fit_failed",
            Error::FitFailed { .. } => "fit_failed",
            Error::AllWeightsInvalid { .. } => "all_weights_invalid",
            Error::Config(_) => "config",
            Error::Load { .. } => "load",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}
