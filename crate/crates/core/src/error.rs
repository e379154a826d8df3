//! Crate-wide error type.

use alloc::string::String;
use core::fmt;

/// Convenience alias used across the crate.
pub type Result<T> = core::result::Result<T, Error>;

/// Errors reported by model construction, set building, and estimation.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two inputs that must agree in length do not.
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    /// An input violates a documented precondition.
    InvalidInput { what: &'static str },
    /// A value that must be finite is NaN or infinite.
    NonFinite { what: &'static str },
    /// A scenario or problem configuration is internally inconsistent.
    InvalidConfig { reason: String },
    /// Every observation has a singleton choice set; the likelihood carries
    /// no information about the parameters.
    NoIdentification,
    /// A coefficient escaped the trust bound during optimization, which
    /// signals separation or an unbounded likelihood.
    Separation { coefficient: usize, value: f64 },
    /// The Hessian is singular at the requested point.
    RankDeficient,
    /// Correction offsets that depend on the parameters were passed to the
    /// estimator; those are evaluation-only.
    BetaDependentCorrections,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch {
                what,
                expected,
                got,
            } => write!(
                f,
                "dimension mismatch in {what}: expected {expected}, got {got}"
            ),
            Error::InvalidInput { what } => write!(f, "invalid input: {what}"),
            Error::NonFinite { what } => write!(f, "non-finite value in {what}"),
            Error::InvalidConfig { reason } => write!(f, "invalid configuration: {reason}"),
            Error::NoIdentification => {
                write!(
                    f,
                    "no identification: every observation has a singleton choice set"
                )
            }
            Error::Separation { coefficient, value } => write!(
                f,
                "separation or divergence: coefficient {coefficient} reached {value}"
            ),
            Error::RankDeficient => write!(f, "rank-deficient Hessian"),
            Error::BetaDependentCorrections => write!(
                f,
                "correction offsets depend on the parameters; the estimator requires fixed offsets"
            ),
        }
    }
}

impl core::error::Error for Error {}
