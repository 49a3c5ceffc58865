use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("signal must hold at least one sample")]
    EmptySignal,

    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),

    /// The quantized version of one input is identically zero, so the integer
    /// correlogram carries no peak information.
    #[error("quantized {0} signal is all zero; widen the quantizer step or raise K")]
    DegenerateQuantization(&'static str),

    #[error("internal overflow while unpacking lag {lag}: |{value}| exceeds bound {bound}")]
    InternalOverflow { lag: i64, value: i64, bound: i64 },

    #[error("FFT length {0} is not a power of two")]
    BadLength(usize),

    #[error("invalid quantizer: {0}")]
    InvalidQuantizer(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
