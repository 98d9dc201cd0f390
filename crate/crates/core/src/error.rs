use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("stationary distribution is not unique (rank {rank} < {states})")]
    NonUniqueStationary { rank: usize, states: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("observation {0} does not belong to the emission space")]
    InvalidObservation(String),

    #[error("class label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },

    #[error("window evidence underflowed to zero")]
    EvidenceUnderflow,

    #[error("conditioning event has probability zero")]
    InconsistentConditioning,

    #[error("exact enumeration needs {windows} windows, cap is {cap}")]
    EnumerationTooLarge { windows: u128, cap: u64 },

    #[error("operation requires a discrete emission model")]
    UnsupportedEmission,

    #[error("assumption (A) violated: {0}")]
    AssumptionAViolated(String),

    #[error("exact integration is unavailable for gaussian emissions")]
    IntegrationUnavailable,

    #[error("window has length {got}, classifier expects {expected}")]
    WindowLengthMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
