use thiserror::Error;

use crate::algebra::AlgebraError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("metric is singular at node {node}")]
    SingularMetric { node: usize },
    #[error("at node {node}: {source}")]
    Pointwise { node: usize, source: AlgebraError },
    #[error("derivative order {requested} exceeds the cap {cap}")]
    OrderTooHigh { requested: usize, cap: usize },
}
