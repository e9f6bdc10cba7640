use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// The input violates a genericity hypothesis (a vanishing coefficient,
    /// a singular circle configuration, ...).
    #[error("degenerate signal: {0}")]
    Degenerate(String),

    /// No candidate satisfies the measurement equations at some stage.
    #[error("inconsistent measurements at {stage}: {detail}")]
    Inconsistent { stage: String, detail: String },

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("singular circle configuration: {0}")]
    SingularConfiguration(String),

    #[error("missing measurement at (k={k}, m={m})")]
    MissingMeasurement { k: usize, m: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn inconsistent(stage: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Inconsistent {
            stage: stage.into(),
            detail: detail.into(),
        }
    }
}
