use thiserror::Error;

/// Errors raised by the solver stack.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum SgError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("operation `{op}` is not supported on a {domain} domain")]
    UnsupportedDomain { op: &'static str, domain: &'static str },

    #[error("numerical error: {0}")]
    Numerical(String),

    /// Uniform ellipticity lost: `mu` reached `limit` at node `(x, y)`.
    #[error("stability violation: mu = {mu:.6} >= {limit:.6} at ({x:.4}, {y:.4})")]
    StabilityViolation { mu: f64, limit: f64, x: f64, y: f64 },

    #[error("linear solver did not converge in {iterations} iterations (relative residual {residual:.3e})")]
    SolverDiverged { iterations: usize, residual: f64 },
}

pub type Result<T> = std::result::Result<T, SgError>;
