use thiserror::Error;

use crate::model::Couplings;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error(
        "zero mode at q = ({qx}, {qy}) for couplings {couplings}; the ground state is degenerate"
    )]
    Degenerate {
        couplings: Couplings,
        qx: f64,
        qy: f64,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("fit failed: {reason}")]
    Fit {
        reason: String,
        /// `(parameter, residual)` pairs evaluated before giving up, when available.
        residual_curve: Vec<(f64, f64)>,
    },

    #[error("finite-difference oracle failed: {0}")]
    OracleFailure(String),

    #[error("cannot build thread pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn fit(reason: impl Into<String>) -> Self {
        Error::Fit {
            reason: reason.into(),
            residual_curve: Vec::new(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
