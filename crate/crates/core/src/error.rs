use thiserror::Error;

/// Errors produced by the chain, receiver and solver routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid chain length {n}: need at least {min} nodes")]
    InvalidChainLength { n: usize, min: usize },

    #[error("coupling on bond {bond} must be strictly positive, got {value}")]
    NonPositiveCoupling { bond: usize, value: f64 },

    #[error("expected {expected} bulk couplings, got {got}")]
    BulkLength { expected: usize, got: usize },

    #[error("disorder value {value} on bond {bond} lies outside [-1, 1]")]
    DisorderOutOfRange { bond: usize, value: f64 },

    #[error("negative disorder amplitude {0}")]
    NegativeEpsilon(f64),

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("sender state is not normalized: |norm^2 - 1| = {deviation:e}")]
    NormViolation { deviation: f64 },

    #[error("vacuum amplitude a0 must be real, got imaginary part {0:e}")]
    ComplexVacuumAmplitude(f64),

    #[error("sender of {sender} nodes overlaps the receiver on a chain of {n} nodes")]
    SenderReceiverOverlap { sender: usize, n: usize },

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("no maximum of the end-to-end amplitude above {floor} within t <= {t_max}")]
    NoArrival { floor: f64, t_max: f64 },

    #[error("unsupported sender size {0} (probing is defined for 4-node senders)")]
    UnsupportedSenderSize(usize),

    #[error("incomplete extraction, undetermined: {}", .0.join(", "))]
    IncompleteExtraction(Vec<String>),

    #[error("ill-conditioned extraction: {what} has magnitude {value:e}")]
    Conditioning { what: String, value: f64 },

    #[error("invalid target state: {0}")]
    InvalidTarget(String),

    #[error("target matrix has zero norm")]
    ZeroNormTarget,

    #[error("Werner parameter p = {p} is not creatable (best residual {residual:e})")]
    Infeasible { p: f64, residual: f64 },

    #[error("solver did not converge (best residual {residual:e})")]
    NotConverged { residual: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

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
