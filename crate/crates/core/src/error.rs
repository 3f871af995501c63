use thiserror::Error;

/// Errors produced by the library.
///
/// Operator evaluations never error on a vanishing denominator; they return
/// `f64::INFINITY` instead (the `1/0 = ∞` convention).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum HardyError {
    #[error("invalid exponents p={p}, q={q}: require 1 < p <= q < inf")]
    InvalidExponents { p: f64, q: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("index {index} out of range [{lo}, {hi}]")]
    IndexOutOfRange { index: usize, lo: usize, hi: usize },

    #[error("invalid sequence: {0}")]
    InvalidSequence(String),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("non-summable iterate: {0}")]
    NonSummable(String),

    #[error("iteration diverged: {0}")]
    Diverged(String),

    #[error("{0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, HardyError>;
