use thiserror::Error;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("sample is empty")]
    EmptySample,
    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },
    #[error("series of length {len} is shorter than the minimum segment length {min_seg_len}")]
    SeriesTooShort { len: usize, min_seg_len: usize },
    #[error("segment [{start}, {end}) has fewer than {min} points")]
    SegmentTooShort {
        start: usize,
        end: usize,
        min: usize,
    },
    #[error("invalid segmentation: {reason}")]
    InvalidSegmentation { reason: String },
    #[error("invalid window plan: {reason}")]
    InvalidWindowPlan { reason: String },
    #[error("length mismatch in {context}: {left} vs {right}")]
    LengthMismatch {
        context: &'static str,
        left: usize,
        right: usize,
    },
    #[error("invalid parameter: {reason}")]
    InvalidParameter { reason: String },
    #[error("trend fit needs at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("time axis is degenerate (all labels equal)")]
    DegenerateTimeAxis,
    #[error("location keys differ between inputs: {0}")]
    KeyMismatch(String),
}
