use thiserror::Error;

/// Errors raised by oracles, estimators and testers.
///
/// Budget overruns are configuration bugs rather than tester outcomes, so they
/// surface as errors instead of verdicts.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("sample budget exhausted: requested {requested}, budget {budget}")]
    SampleBudget { requested: usize, budget: usize },

    #[error("query budget exhausted: budget {budget}")]
    QueryBudget { budget: usize },

    #[error("query at index {index} but only {drawn} samples have been drawn")]
    UndrawnQuery { index: usize, drawn: usize },

    #[error("non-finite coordinate: {0}")]
    NonFinite(f64),

    #[error("duplicate x coordinate: {0}")]
    DuplicateX(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("gave up after {0} attempts")]
    RetryLimit(usize),

    #[error("infeasible grid: {0}")]
    InfeasibleGrid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
