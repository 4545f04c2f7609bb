use thiserror::Error;

/// Errors raised by estimators, tuning procedures and simulation drivers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("no data")]
    NoData,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid record {index}: {reason}")]
    InvalidRecord { index: usize, reason: String },

    #[error("positivity violated: group share {share:.4} outside [{eps}, {}]", 1.0 - eps)]
    Positivity { share: f64, eps: f64 },

    #[error("did not converge: {0}")]
    NonConvergence(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
