use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    // --- PGM decoding ---
    #[error("bad magic number: expected \"P2\" or \"P5\", found {0:?}")]
    BadMagic(String),
    #[error("maxval {0} outside [1, 255]")]
    BadMaxval(i64),
    #[error("non-positive image dimensions {width}x{height}")]
    BadDimensions { width: i64, height: i64 },
    #[error("truncated pixel payload: expected {expected} samples, got {got}")]
    Truncated { expected: usize, got: usize },
    #[error("malformed PGM header: {0}")]
    MalformedHeader(String),
    #[error("sample {value} exceeds maxval {maxval}")]
    SampleOutOfRange { value: i64, maxval: i64 },

    // --- domain validation ---
    #[error("intensity {value} at pixel {index} outside [0, 1]")]
    IntensityOutOfRange { index: usize, value: f64 },
    #[error("parameter `{name}` must be {requirement}, got {value}")]
    InvalidParam {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("kernel radius must be non-negative, got {0}")]
    NegativeRadius(f64),

    // --- solver runtime ---
    #[error("forward integration produced a non-finite value at step {step}")]
    Diverged { step: usize },
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
