use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] gbe_core::Error),

    #[error("eigenvalue {index} did not converge within {sweeps} QL sweeps")]
    EigenNonConvergence { index: usize, sweeps: usize },

    #[error("eigenvalue pair {index} is split by {gap:e}, expected a degenerate pair")]
    Pairing { index: usize, gap: f64 },

    #[error("invalid ensemble: {0}")]
    InvalidSpec(String),

    #[error("invalid grid `{text}`: {why}")]
    Grid { text: String, why: String },

    #[error("{0}")]
    Usage(String),

    #[error("check failed: {0}")]
    CheckFailed(String),

    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
