use thiserror::Error;

/// Errors raised anywhere in the simulation and analysis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid size: {0}")]
    InvalidSize(String),

    #[error("model/lattice mismatch: {0}")]
    Mismatch(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("state vector cap exceeded: {n_sites} sites > {cap} (raise the cap explicitly to proceed)")]
    SizeCap { n_sites: usize, cap: usize },

    #[error("solver did not converge after {iterations} iterations (best residual {residual:.3e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("not enough samples: {0}")]
    NotEnoughSamples(usize),

    #[error("matrix is not symmetric (max asymmetry {0:.3e})")]
    Asymmetric(f64),

    #[error("significantly negative covariance eigenvalue {0:.3e}")]
    NegativeEigenvalue(f64),

    #[error("degenerate spectrum: second principal component is zero")]
    DegenerateSpectrum,

    #[error("zero-norm intermediate state during measurement")]
    ZeroNorm,

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
