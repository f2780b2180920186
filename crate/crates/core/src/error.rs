use thiserror::Error;

/// Errors raised by the numerical routines and parameter constructors.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },

    #[error("{func} did not converge within {terms} terms")]
    Convergence { func: &'static str, terms: usize },

    #[error("quadrature exceeded {limit} subdivisions (error estimate {abs_err:e})")]
    SubdivisionLimit { limit: usize, abs_err: f64 },

    #[error("{func} is ill-conditioned here (estimated relative error {rel_err:e})")]
    IllConditioned { func: &'static str, rel_err: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain {
        func,
        detail: detail.into(),
    }
}
