use thiserror::Error;

/// Errors raised by the rough-path routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: (dim {0}, level cap {1}) vs (dim {2}, level cap {3})")]
    ShapeMismatch(usize, usize, usize, usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("level cap {0} is not supported (allowed: 1, 2, 3)")]
    UnsupportedLevelCap(usize),

    #[error("level {level} out of range for level cap {cap}")]
    LevelOutOfRange { level: usize, cap: usize },

    #[error("level {level} block has {found} coefficients, expected {expected}")]
    BlockSize {
        level: usize,
        expected: usize,
        found: usize,
    },

    #[error("scalar part must be 0, found {0}")]
    ScalarNotZero(f64),

    #[error("scalar part must be 1, found {0}")]
    ScalarNotOne(f64),

    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown identifier `{name}` at position {pos}")]
    UnknownIdentifier { pos: usize, name: String },

    #[error("variable x{index} exceeds state dimension {dim}")]
    VariableOutOfRange { index: usize, dim: usize },

    #[error("not converged after dyadic depth {depth} (last delta {last_delta:e})")]
    NotConverged {
        depth: usize,
        last_delta: f64,
        best: Vec<f64>,
    },

    #[error("tensor is not a Lie element (symmetric residual {residual:e})")]
    NotLieElement { residual: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("solution blew up at t = {time} (|x| = {norm:e})")]
    BlowUp { time: f64, norm: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("CSV error at row {row}: {msg}")]
    Csv { row: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
