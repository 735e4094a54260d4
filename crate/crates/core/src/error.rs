use thiserror::Error;

/// Errors reported by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("precision {0} exceeds the supported maximum of 64 bits")]
    PrecisionTooLarge(u32),

    #[error("mantissa {mantissa} does not fit in {precision} bits")]
    MantissaOutOfRange { mantissa: u64, precision: u32 },

    #[error("level {level} exceeds the stored precision {precision}")]
    LevelExceedsPrecision { level: u32, precision: u32 },

    #[error("point set has {0} points, which is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{what} needs 2^{needed_log2} evaluations, above the limit of 2^{limit_log2}; {hint}")]
    Guard {
        what: &'static str,
        needed_log2: f64,
        limit_log2: f64,
        hint: &'static str,
    },

    #[error("point set is not a ({delta}, s, d)-net: {detail}")]
    NotANet { delta: u32, detail: String },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
