use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("matrix is not Hermitian (residual {residual:.3e}) in segment {segment}")]
    NonHermitian { segment: usize, residual: f64 },
    #[error("non-finite value in matrix exponential of segment {segment}")]
    NonFinite { segment: usize },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("eigensolver failed: {0}")]
    Linalg(String),
    #[error("level crossing: state {state} has max overlap {overlap:.3} below threshold")]
    LevelCrossing { state: String, overlap: f64 },
    #[error("no sign change of {quantity} over the supplied range")]
    NoSignChange { quantity: String },
    #[error("not converged: {what} (achieved {achieved:.3e})")]
    Convergence { what: String, achieved: f64 },
    #[error("query {value} outside table range [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl Error {
    /// True for errors that come from numerics rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonFinite { .. }
                | Error::Linalg(_)
                | Error::LevelCrossing { .. }
                | Error::Convergence { .. }
                | Error::NoSignChange { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Invalid(msg.into()))
}
