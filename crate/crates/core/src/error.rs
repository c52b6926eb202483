use thiserror::Error;

/// Errors raised by the numerical kernels and model constructors.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration or parameter invariant does not hold.
    #[error("invalid parameter `{field}`: {message}")]
    InvalidParameter {
        field: &'static str,
        message: String,
    },

    /// Node distances do not describe a realizable triangle.
    #[error("geometry error: {0}")]
    Geometry(String),

    /// The requested placement is outside the supported isosceles layout.
    #[error("unsupported geometry: {0}")]
    UnsupportedGeometry(String),

    /// Adaptive quadrature ran out of subdivisions before meeting its tolerance.
    #[error("quadrature did not converge: estimate {estimate:e}, error bound {error_bound:e}")]
    QuadratureConvergence { estimate: f64, error_bound: f64 },

    /// An infinite series was not summed to tolerance within its term budget.
    #[error("series did not converge after {terms} terms: partial sum {partial_sum:e}, tail bound {tail_bound:e}")]
    SeriesConvergence {
        terms: usize,
        partial_sum: f64,
        tail_bound: f64,
    },
}

impl Error {
    pub(crate) fn invalid(field: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
