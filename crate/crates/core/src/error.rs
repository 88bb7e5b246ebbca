use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical procedure did not reach its target accuracy.
    #[error("numerical failure in {context}: {detail} (estimate {estimate:e}, error bound {error:e}, panels {panels})")]
    Numerical {
        context: String,
        detail: String,
        estimate: f64,
        error: f64,
        panels: usize,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn numerical(context: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Numerical {
            context: context.into(),
            detail: detail.into(),
            estimate: f64::NAN,
            error: f64::NAN,
            panels: 0,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
