use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("generator variant not applicable: {0}")]
    VariantMismatch(String),

    #[error("truncation error: {0}")]
    Truncation(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("integration unstable: {0}")]
    Stability(String),

    #[error("no stationary state: {0}")]
    NoStationaryState(String),

    #[error("stationary kernel is degenerate (dimension {0})")]
    DegenerateKernel(usize),

    #[error("degenerate Bohr spectrum: {0}")]
    DegenerateSpectrum(String),

    #[error("boundary leak: flux {flux:.3e} at t = {time}")]
    BoundaryLeak { flux: f64, time: f64 },

    #[error("cutoff too small: tail bound {tail:.3e} at cutoff {cutoff}")]
    CutoffTooSmall { cutoff: usize, tail: f64 },

    #[error("insufficient samples: need at least 3, got {0}")]
    InsufficientSamples(usize),

    #[error("unknown preset '{0}'")]
    UnknownPreset(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("linear algebra failure: {0}")]
    Linalg(String),
}

impl Error {
    pub(crate) fn dims(expected: usize, found: usize) -> Self {
        Error::DimensionMismatch { expected, found }
    }
}
