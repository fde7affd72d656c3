use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GlbmError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("numerical overflow after {steps} steps: non-finite matrix entries")]
    NumericalOverflow { steps: usize },

    #[error("solver failure: {0}")]
    SolverFailure(String),

    #[error("invalid usage: {0}")]
    InvalidUsage(String),

    #[error("level {level} out of range (finest level {finest})")]
    LevelOutOfRange { level: usize, finest: usize },

    #[error("transform undefined at {re}+{im}i: all mass excluded")]
    UndefinedAtPoint { re: f64, im: f64 },

    #[error("window too small: sublevel set still touches the frame at half-width {half_width}")]
    WindowTooSmall { half_width: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}

impl GlbmError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        GlbmError::InvalidParameter(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, GlbmError>;
