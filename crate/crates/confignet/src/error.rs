use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("rejected input: {0}")]
    RejectedInput(String),

    #[error("internal consistency violated: {0}")]
    Inconsistent(String),

    #[error("load error in {path} at row {row}, column {col}: {message}")]
    Load {
        path: String,
        row: usize,
        col: usize,
        message: String,
    },

    #[error("node configuration failed after {attempts} attempts (best xi {best_xi:.3e}, best |v| {best_v_norm:.3e})")]
    ConfigurationFailure {
        attempts: usize,
        best_xi: f64,
        best_v_norm: f64,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
