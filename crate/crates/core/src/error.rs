use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} out of range: {value}")]
    Domain { what: &'static str, value: f64 },

    #[error("distribution does not sum to 1 (sum = {sum})")]
    NotNormalized { sum: f64 },

    #[error("table shape error: {0}")]
    Shape(String),

    #[error("no sign change on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("bisection did not converge after {iterations} iterations (bracket width {width})")]
    NoConvergence { iterations: u32, width: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("estimate does not match the parameters it is compared against: {0}")]
    MismatchedParams(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
