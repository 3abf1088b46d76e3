use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlgebraError {
    #[error("3-form is not positive (smallest eigenvalue of normalized B = {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },
    #[error("metric is singular or not positive definite")]
    SingularMetric,
    #[error(
        "recovery of phi did not converge after {iterations} iterations (residual {residual:e})"
    )]
    NoConvergence { iterations: usize, residual: f64 },
}
