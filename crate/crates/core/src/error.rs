use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter `{name}` = {value} is out of domain: {reason}")]
    ParameterDomain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("dimension mismatch: {what} has length {found}, expected {expected}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("horizon T = {horizon} exceeds the supported maximum {max}; use the stable product form")]
    UnsupportedRange { horizon: u64, max: u64 },

    #[error("insufficient data: need at least {needed} distinct time points, got {found}")]
    InsufficientData { needed: usize, found: usize },

    #[error("degenerate series: all values equal {0}, nothing to fit")]
    DegenerateSeries(f64),

    #[error("unsupported model: {0}")]
    UnsupportedModel(&'static str),

    #[error("non-positive residual 1 - value/capacity at t = {offending_t:?}")]
    NonPositiveResidual { offending_t: Vec<f64> },
}

pub type Result<T> = std::result::Result<T, Error>;
