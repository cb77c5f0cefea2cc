use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {left:?} vs {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("{op} needs rows >= cols, got {rows}x{cols}")]
    NotTall {
        op: &'static str,
        rows: usize,
        cols: usize,
    },
    #[error("shape error: {0}")]
    Shape(String),
    #[error("numerical instability: {0}")]
    NumericalInstability(String),
    #[error("rank-deficient input: column {column} has residual norm {norm:e}")]
    RankDeficient { column: usize, norm: f64 },
    #[error("argument outside supported domain: {0}")]
    Domain(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("cannot decode: {0}")]
    Decode(String),
    #[error("out of range: {0}")]
    Range(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
