use thiserror::Error;

/// Errors raised by the numerical core and the harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("argument {name} = {value} outside [0, 1]")]
    Domain { name: &'static str, value: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("frequency {frequency} exceeds the resolution of a {nodes}-node grid")]
    Resolution { frequency: usize, nodes: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("model invariant violated: {0}")]
    Model(String),

    #[error("degenerate design: {0}")]
    DegenerateDesign(String),

    #[error("sample of size {n} too small: split size m = {m} must exceed 3")]
    DegenerateScheme { n: usize, m: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("guard failure: {0}")]
    Guard(String),

    #[error("missing record for estimator {0}")]
    MissingRecord(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Guard(_) | Error::DegenerateDesign(_) | Error::Io(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
