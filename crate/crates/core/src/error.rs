use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("field has {got} values, grid needs {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite value at ({x}, {y}) and no mask policy covers it")]
    Singular { x: f64, y: f64 },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("mask mismatch: {0}")]
    MaskMismatch(String),
    #[error("closed form unavailable for `{0}`; analytic derivatives need one")]
    NoClosedForm(String),
    #[error("closed form provides derivatives up to order {got}, {needed} needed")]
    InsufficientOrder { needed: usize, got: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("degenerate immersion: {0}")]
    Degenerate(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
