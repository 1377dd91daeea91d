use thiserror::Error;

/// Errors raised by the geometric, discretization and experiment layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("radius {r} lies outside the admissible interval (0, {limit})")]
    OutOfRange { r: f64, limit: f64 },

    #[error("adaptive quadrature stopped at estimated error {estimate:e} (requested {tol:e})")]
    Quadrature { tol: f64, estimate: f64 },

    #[error("linear solver stopped after {iterations} iterations at relative residual {residual:e}")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
