//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid bitmap: {0}")]
    InvalidBitmap(String),

    #[error("invalid run matrix: {0}")]
    InvalidRunMatrix(String),

    #[error("rectangle out of bounds: {rect} does not fit in {height}x{width}")]
    OutOfBounds {
        rect: String,
        height: u32,
        width: u32,
    },

    #[error("column cursor exhausted: all {0} columns already popped")]
    CursorExhausted(u32),

    #[error("degenerate separator group: v_beta precedes v_alpha")]
    DegenerateGroup,

    #[error("block contains no ink rows")]
    EmptyBlock,

    #[error("line contains no ink columns")]
    EmptyLine,

    #[error("ground truth contains no lines")]
    EmptyGroundTruth,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("infeasible layout spec: {0}")]
    InfeasibleSpec(String),

    #[error("unsupported or corrupt file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
