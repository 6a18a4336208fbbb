use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification used by front-ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Io,
    Validation,
    Numeric,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("geometry mismatch: {0}")]
    GeometryMismatch(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid volume: {0}")]
    InvalidVolume(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate intensity range: lower and upper bound are both {0}")]
    DegenerateRange(f64),

    #[error("target shape {target:?} is smaller than source shape {source_dims:?}")]
    TargetTooSmall {
        source_dims: [usize; 3],
        target: [usize; 3],
    },

    #[error("dimension {axis} has odd length {len}")]
    OddDimension { axis: usize, len: usize },

    #[error("region of interest with label {0} is empty")]
    EmptyRoi(u32),

    #[error("label mask is empty")]
    EmptyLabel,

    #[error("volume too small: {0}")]
    VolumeTooSmall(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("value {value} outside of [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("every case must be rated by the same number of raters (case {case} has {found}, expected {expected})")]
    UnequalRaterCounts {
        case: usize,
        found: usize,
        expected: usize,
    },

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("no admissible patch found after {0} attempts")]
    NoAdmissiblePatch(usize),

    #[error("unknown {kind} `{name}`")]
    UnknownName { kind: &'static str, name: String },

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Io(_) | Error::Format(_) | Error::Json(_) | Error::Csv(_) => ErrorCategory::Io,
            Error::DegenerateRange(_)
            | Error::DegenerateSample(_)
            | Error::InsufficientData(_)
            | Error::NonFinite(_)
            | Error::NoAdmissiblePatch(_) => ErrorCategory::Numeric,
            _ => ErrorCategory::Validation,
        }
    }
}
