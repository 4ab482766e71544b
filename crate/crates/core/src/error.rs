use thiserror::Error;

/// Errors raised by the simulator and its diagnostics.
#[derive(Debug, Error)]
pub enum Error {
    /// Inputs violate a documented precondition (dimension mismatch, empty grid, ...).
    #[error("usage error: {0}")]
    Usage(String),
    /// A gradient or force was requested at coincident particles.
    #[error("singularity: {0}")]
    Singularity(String),
    /// The model lies outside what the requested routine supports.
    #[error("unsupported model: {0}")]
    Unsupported(String),
    /// `w(r) = r^{d-1} v'(r)` never reaches the coupling threshold.
    #[error("external field too weak: {0}")]
    FieldTooWeak(String),
    #[error("initialization failed: {0}")]
    Initialization(String),
    /// A dynamics step produced non-finite coordinates.
    #[error("step size error: {0}")]
    StepSize(String),
    /// The requested method cannot handle these inputs; another one can.
    #[error("method unavailable: {0}")]
    MethodUnavailable(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

macro_rules! usage {
    ($($arg:tt)*) => { $crate::error::Error::Usage(format!($($arg)*)) };
}
pub(crate) use usage;
