use thiserror::Error;

/// Errors produced by the imaging toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("newton solver did not converge after {iterations} iterations (relative residual {residual:.3e})")]
    ConvergenceFailure { iterations: usize, residual: f64 },

    #[error("no admissible scaling factor after {halvings} halvings")]
    SelectionFailure { halvings: u32 },

    #[error("measurement {value:.6e} V exceeds the largest instrument range {largest:.3e} V")]
    RangeOverflow { value: f64, largest: f64 },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error("missing artifact: {0}")]
    MissingArtifact(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
