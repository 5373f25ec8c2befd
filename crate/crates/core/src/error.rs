use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive quadrature ran out of panels before reaching the tolerance.
    #[error("quadrature did not converge: achieved error {achieved:e}, requested {requested:e}")]
    QuadratureNotConverged { achieved: f64, requested: f64 },

    /// The recurrence lost positivity (`β_n <= 0`) at the given index.
    #[error("recurrence coefficient {index} is not positive (beta = {beta:e})")]
    RecurrenceBreakdown { index: usize, beta: f64 },

    /// A chain normal mode has non-positive frequency at finite temperature.
    #[error("normal mode {index} has non-positive frequency {frequency:e}; thermal state undefined")]
    NonPositiveMode { index: usize, frequency: f64 },

    #[error("chain-length estimate did not converge up to M = {last_tested}")]
    ChainLengthNotConverged { last_tested: usize },

    /// A tensor acquired NaN or infinite entries during evolution.
    #[error("non-finite tensor entry after step {step} on bond {bond}")]
    NonFinite { step: usize, bond: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("Hilbert-space dimension {dimension} exceeds cap {cap}")]
    DimensionCap { dimension: usize, cap: usize },

    #[error("eigen-solver failed to converge after {iterations} iterations")]
    EigenNotConverged { iterations: usize },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for failures of the numerics, as opposed to invalid input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::QuadratureNotConverged { .. }
                | Error::RecurrenceBreakdown { .. }
                | Error::NonPositiveMode { .. }
                | Error::ChainLengthNotConverged { .. }
                | Error::NonFinite { .. }
                | Error::EigenNotConverged { .. }
        )
    }
}
