use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("contract violation in {op}: {detail}")]
    Contract { op: &'static str, detail: String },

    #[error("dimension mismatch in {op}: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        op: &'static str,
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("non-finite value produced by {op}")]
    NonFinite { op: &'static str },

    #[error("matrix is numerically singular (smallest pivot {smallest:e}, largest {largest:e})")]
    Singular { smallest: f64, largest: f64 },

    #[error("did not converge after {iterations} iterations (final gap {gap:e})")]
    NoConvergence { iterations: usize, gap: f64 },

    #[error("degenerate diagonal at index {index}: |(GΨ)_ii| = {value:e} is below {threshold:e}")]
    DegenerateDiagonal {
        index: usize,
        value: f64,
        threshold: f64,
    },

    #[error("column {column} has norm {norm}, expected 1")]
    NotUnitNorm { column: usize, norm: f64 },

    #[error("{param} = {value} is out of regime: {expected}")]
    OutOfRegime {
        param: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("{param} = {value} is outside the domain {expected}")]
    Domain {
        param: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("invalid config field `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },
}

impl Error {
    pub(crate) fn contract(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Contract {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
