use thiserror::Error;

/// Errors raised by the tensor, operator, scheme and simulation layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("letter {letter} out of range for alphabet size {dim}")]
    LetterOutOfRange { letter: usize, dim: usize },

    #[error("shape mismatch: ({0}, {1}) vs ({2}, {3})")]
    ShapeMismatch(usize, usize, usize, usize),

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("shuffle logarithm needs a unit empty-word coefficient, got {0}")]
    NotUnitLevelZero(num_complex::Complex64),

    #[error("vanishing empty-word coefficient at t = {time}; try the transport scheme")]
    VanishingConstant { time: f64 },

    #[error("linear operator does not preserve the truncation: {role} depends on word {word}")]
    NotInvariant { role: String, word: String },

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite values in {0}")]
    NonFinite(&'static str),

    #[error("quadrature did not converge: last change {0:e}")]
    NoConvergence(f64),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
