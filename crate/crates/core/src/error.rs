use thiserror::Error;

/// Errors raised by measure construction, norm evaluation and the
/// inequality-transfer machinery.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid too coarse: relative quadrature defect {defect:e} exceeds {limit:e}")]
    GridTooCoarse { defect: f64, limit: f64 },

    #[error("probability {0} outside [0, 1]")]
    ProbabilityOutOfRange(f64),

    #[error("grid functions live on different grids")]
    DomainMismatch,

    #[error("non-finite sample in grid function at index {0}")]
    NonFinite(usize),

    #[error("value out of representable range: {0}")]
    Range(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("divergent integral: {0}")]
    Divergent(String),

    #[error("time step unstable: {0}")]
    Unstable(String),

    #[error("eigen-solve failed: {0}")]
    EigenSolve(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
