use thiserror::Error;

use crate::multi_index::MultiIndex;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("moment order {order} exceeds the declared maximum {max}")]
    OrderOverflow { order: usize, max: usize },

    #[error("adaptive quadrature did not converge (estimate {estimate:e}, error {error:e})")]
    QuadratureFailure { estimate: f64, error: f64 },

    #[error("point {x} is not an atom of the discrete weight system")]
    NotAnAtom { x: f64 },

    #[error("multi-index {index} is not perfect: {reason}")]
    NonPerfectIndex { index: MultiIndex, reason: String },

    #[error("normalization vanishes at {index}: {what}")]
    ZeroNormalization { index: MultiIndex, what: String },

    #[error("kernel formula needs every component of {index} to be at least 1")]
    DegenerateIndex { index: MultiIndex },

    #[error("points x = {x} and y = {y} are too close for the difference quotient")]
    DiagonalPoint { x: f64, y: f64 },

    #[error("not in the span of the neighbouring type II polynomials (residual {residual:e})")]
    NotInV { residual: f64 },

    #[error("operation not supported for this weight system: {0}")]
    UnsupportedMeasure(String),

    #[error("point {0} lies on the real axis; boundary values need an explicit side")]
    OnAxisWithoutMode(f64),

    #[error("not enough samples: {0}")]
    InsufficientSamples(usize),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::OrderOverflow { .. } => "OrderOverflow",
            Error::QuadratureFailure { .. } => "QuadratureFailure",
            Error::NotAnAtom { .. } => "NotAnAtom",
            Error::NonPerfectIndex { .. } => "NonPerfectIndex",
            Error::ZeroNormalization { .. } => "ZeroNormalization",
            Error::DegenerateIndex { .. } => "DegenerateIndex",
            Error::DiagonalPoint { .. } => "DiagonalPoint",
            Error::NotInV { .. } => "NotInV",
            Error::UnsupportedMeasure(_) => "UnsupportedMeasure",
            Error::OnAxisWithoutMode(_) => "OnAxisWithoutMode",
            Error::InsufficientSamples(_) => "InsufficientSamples",
            Error::InvalidInput(_) => "InvalidInput",
            Error::Config(_) => "Config",
        }
    }
}
