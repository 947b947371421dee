use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unsupported QAM order {0}; expected one of 4, 8, 16, 32, 64")]
    UnsupportedOrder(u32),

    #[error("bit sequence of length {len} is not a multiple of {bits_per_symbol}")]
    BitLength { len: usize, bits_per_symbol: usize },

    #[error("expected {expected} symbols, got {got}")]
    SymbolCount { expected: usize, got: usize },

    #[error("FFT size {0} must be a power of two >= 4")]
    FftSize(usize),

    #[error("expected {expected} samples, got {got}")]
    Length { expected: usize, got: usize },

    #[error("spectrum is not Hermitian-symmetric (worst mismatch {0:e})")]
    NotHermitian(f64),

    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("negative optical power {0:e} W")]
    NegativePower(f64),

    #[error("reference signal is identically zero")]
    ZeroSignal,

    #[error("saturation point: |alpha| = {alpha:e} is below {epsilon:e}, link unusable")]
    Saturated { alpha: f64, epsilon: f64 },

    #[error("distortion noise variance {value:e} is negative beyond rounding (second moment {scale:e})")]
    NegativeVariance { value: f64, scale: f64 },

    #[error("empty {0} grid")]
    EmptyGrid(&'static str),

    #[error("{0} grid must be sorted ascending")]
    UnsortedGrid(&'static str),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
