use thiserror::Error;

use crate::series::SeriesKind;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("series is empty")]
    Empty,
    #[error("times and values differ in length ({times} vs {values})")]
    LengthMismatch { times: usize, values: usize },
    #[error("a series needs at least 2 samples, got {0}")]
    TooShort(usize),
    #[error("times not strictly increasing at index {index} (t = {value})")]
    NonIncreasing { index: usize, value: f64 },
    #[error("non-finite entry at index {index}: {value}")]
    NonFinite { index: usize, value: f64 },
    #[error("value {value} at index {index} is out of range for a {kind} series")]
    OutOfRange {
        index: usize,
        value: f64,
        kind: SeriesKind,
    },
    #[error("value {value} at index {index} must be strictly positive")]
    NonPositive { index: usize, value: f64 },
    #[error("t = {t} lies outside the grid span [0, {end}]")]
    OutOfSpan { t: f64, end: f64 },
    #[error("series spans disagree: {0} vs {1} years")]
    SpanMismatch(f64, f64),
    #[error("averages are undefined at t = 0; use the t -> 0 limit")]
    ZeroTime,
    #[error("invalid parameter: {0}")]
    Domain(String),
    #[error("infinite exploitation rate (sigma = 1)")]
    InfiniteExploitation,
    #[error("root finder did not converge after {iterations} iterations (bracket width {width})")]
    NonConvergence { iterations: usize, width: f64 },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{path}: row {row}, column {column}: {message}")]
    Input {
        path: String,
        row: usize,
        column: String,
        message: String,
    },
    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error("infeasible scenario: {0}")]
    Infeasible(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
