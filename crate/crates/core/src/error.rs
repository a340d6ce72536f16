use thiserror::Error;

/// Errors produced by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("pole of {function} at {at}")]
    Pole { function: &'static str, at: f64 },

    #[error("{function} overflows at {at}")]
    Overflow { function: &'static str, at: f64 },

    #[error("{function}: argument outside domain ({reason})")]
    Domain { function: &'static str, reason: String },

    #[error("{what} did not converge after {iterations} iterations (last error estimate {estimate:e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        estimate: f64,
    },

    #[error("integrand produced a non-finite value at x = {at}")]
    NonFiniteIntegrand { at: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    pub(crate) fn domain(function: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            function,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
