use thiserror::Error;

use crate::fields::FieldError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("not enough usable data: {0}")]
    InsufficientData(String),
    #[error("trajectory has {0} snapshots; at least 3 are needed")]
    InsufficientTrajectory(usize),
    #[error("{0}")]
    Unavailable(String),
}
