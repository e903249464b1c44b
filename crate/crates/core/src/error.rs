//! Error types shared across the crate.

use crate::multiindex::MultiIndex;
use thiserror::Error;

/// A single failed model evaluation, with the offending point attached.
#[derive(Debug, Clone)]
pub struct PointFailure {
    /// Position of the point in the requested batch.
    pub index: usize,
    pub point: Vec<f64>,
    pub reason: String,
}

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("x = {x} is outside [-1, 1], the domain of the Legendre basis")]
    OutsideDomain { x: f64 },

    #[error("degree {degree} exceeds the per-dimension maximum {max}")]
    DegreeTooLarge { degree: u32, max: u32 },

    #[error("level {level} is unsupported for {family} (supported: 1..={max})")]
    UnsupportedLevel {
        family: String,
        level: u32,
        max: u32,
    },

    #[error("{quadrature} quadrature requires the {required} polynomial family")]
    IncompatibleBase {
        quadrature: String,
        required: String,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("operands use different polynomial families in dimension {dim}")]
    FamilyMismatch { dim: usize },

    #[error("multi-index set is not admissible: {index:?} is missing backward neighbor {missing:?}")]
    NotAdmissible {
        index: MultiIndex,
        missing: MultiIndex,
    },

    #[error("model evaluation failed at {} point(s); first failure at {:?}: {}",
        .failures.len(),
        .failures.first().map(|f| f.point.clone()).unwrap_or_default(),
        .failures.first().map(|f| f.reason.clone()).unwrap_or_default())]
    ModelEvaluation { failures: Vec<PointFailure> },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cache file {path}, line {line}: {reason}")]
    CacheFormat {
        path: String,
        line: usize,
        reason: String,
    },

    #[error("malformed expansion JSON: {0}")]
    ExpansionFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CoreError {
    /// Convenience constructor for a single failed evaluation.
    pub fn model_failure(index: usize, point: &[f64], reason: impl Into<String>) -> Self {
        CoreError::ModelEvaluation {
            failures: vec![PointFailure {
                index,
                point: point.to_vec(),
                reason: reason.into(),
            }],
        }
    }
}
