use thiserror::Error;

use crate::algebra::AlgebraError;
use crate::fields::FieldError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoflowError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("cannot recover phi at node {node} {coords:?}: {source}")]
    NoConvergence {
        node: usize,
        coords: [usize; 7],
        source: AlgebraError,
    },
    #[error("stability violation at step {step}: {reason}")]
    StabilityViolation { step: usize, reason: String },
    #[error("initial data is not positive; largest safe amplitude is about {safe_amplitude:e}")]
    NotPositive { safe_amplitude: f64 },
    #[error("invalid initial data: {0}")]
    InvalidSpec(String),
}
