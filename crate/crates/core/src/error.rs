use thiserror::Error;

/// Errors produced by the transform library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AdrtError {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("integer overflow in {0}")]
    Overflow(&'static str),

    /// Shrinking a window would silently drop a nonzero sample.
    #[error("window [{lo}, {hi}) would drop the nonzero value at (h={h}, j={column})")]
    Clip {
        lo: i64,
        hi: i64,
        h: i64,
        column: usize,
    },

    /// Backward substitution left the admissible support at the given stage.
    #[error("stage {stage}: value at (h={h}, j={column}) lies outside the admissible support")]
    OutOfRange { stage: u32, h: i64, column: usize },

    #[error("pair is not in the image of the lambda map")]
    Inconsistent,

    #[error("line {line}, column {column}: {message}")]
    Format {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for AdrtError {
    fn from(e: std::io::Error) -> Self {
        AdrtError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, AdrtError>;

pub(crate) fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(AdrtError::Argument(msg.into()))
}
