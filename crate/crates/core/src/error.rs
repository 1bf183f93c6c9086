use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid sequence: {0}")]
    InvalidSequence(String),

    #[error("checkpoint k = {k} lies beyond the data (length {length}) and no tail model is present")]
    CheckpointBeyondData { k: u64, length: usize },

    #[error("checkpoints must be strictly increasing and >= 1 (offending value {0})")]
    BadCheckpoints(u64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("t = {t} lies beyond the horizon {horizon}")]
    BeyondHorizon { t: f64, horizon: f64 },

    #[error("zeta evaluation diverges at s = {0}")]
    DivergentZeta(f64),

    #[error("head-domination test failed at s = {s}: estimated remainder {remainder:e} vs head {head:e}")]
    HeadDomination { s: f64, remainder: f64, head: f64 },

    #[error("memory budget exceeded: need {required_mb} MB, budget {budget_mb} MB")]
    Budget { required_mb: u64, budget_mb: u64 },

    #[error("eigensolver did not meet the residual bound: residual {residual:e}, bound {bound:e}")]
    EigenSolver { residual: f64, bound: f64 },

    #[error("no exact product-trace formula for {0}; assemble a truncated matrix and use the matrix route")]
    NoExactProductTrace(String),

    #[error("theta mismatch: {0} vs {1}")]
    ThetaMismatch(f64, f64),

    #[error("grid mismatch: expected {expected} samples, got {got}")]
    GridMismatch { expected: usize, got: usize },

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("{0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
