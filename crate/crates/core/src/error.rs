use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("eta must be positive for this operation: 0 lies in the spectrum of the generator when eta = 0")]
    EtaZero,
    #[error("too few samples: need at least {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("quadrature certificate failed: relative error {error:.3e} exceeds {tol:.1e} (increase xi_max or n_nodes)")]
    Certificate { error: f64, tol: f64 },
    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("singular linear system: {0}")]
    Singular(String),
    #[error("insufficient points: need {needed}, got {got}")]
    InsufficientPoints { needed: usize, got: usize },
    #[error("nonpositive energy at t = {t}")]
    NonPositiveEnergy { t: f64 },
    #[error("fit window too short: {decades:.2} decades, need {needed}")]
    WindowTooShort { decades: f64, needed: f64 },
    #[error("mode {k} is unobserved (B* mode = 0)")]
    RejectedMode { k: usize },
    #[error("iteration did not converge: {0}")]
    NoConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;
