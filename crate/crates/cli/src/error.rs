use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("line {line}: class label {label} out of range for {classes} classes")]
    LabelOutOfRange { line: u64, label: usize, classes: usize },

    #[error("no data rows")]
    EmptyData,

    #[error(transparent)]
    Model(#[from] hmmem::Error),
}

impl CliError {
    /// 1 for bad input of any kind, 2 for numeric failures on valid input.
    pub fn exit_code(&self) -> i32 {
        use hmmem::Error as E;
        match self {
            CliError::Model(
                E::NonUniqueStationary { .. }
                | E::EvidenceUnderflow
                | E::InconsistentConditioning
                | E::EnumerationTooLarge { .. }
                | E::UnsupportedEmission
                | E::AssumptionAViolated(_)
                | E::IntegrationUnavailable,
            ) => 2,
            _ => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

pub type CliResult<T> = Result<T, CliError>;
