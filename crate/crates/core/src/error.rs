use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("dataset has no examples")]
    EmptyDataset,

    #[error("index {index} out of range for weight vector of length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid hyperparameters: {0}")]
    InvalidParams(String),

    #[error("weight vector is zero")]
    ZeroWeight,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("bound proviso violated: {0}")]
    Proviso(String),

    #[error("stage {stage} did not converge within {max_updates} updates")]
    NonConvergence { stage: usize, max_updates: u64 },

    #[error("dataset too large for this routine: m = {m} exceeds {cap}")]
    SizeCap { m: usize, cap: usize },

    #[error("minimum-norm-point iteration stopped after {iterations} iterations with gap {gap:e}")]
    OracleStalled { iterations: usize, gap: f64 },

    #[error("dimension mismatch: model has {model}, dataset has {data}")]
    DimensionMismatch { model: usize, data: usize },

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}
