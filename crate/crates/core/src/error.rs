use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The root is not bracketed by the supplied interval.
    #[error("root not bracketed: f({lo}) = {f_lo}, f({hi}) = {f_hi}")]
    Bracket {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    /// An iterative method hit its iteration or subdivision cap.
    #[error("{method} did not converge after {iterations} iterations (last estimate {estimate}, error {error})")]
    NoConvergence {
        method: &'static str,
        iterations: usize,
        estimate: f64,
        error: f64,
    },

    /// A function value was NaN or infinite where a finite value is required.
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    /// The distribution is too concentrated for `c` to be defined.
    #[error("degenerate distribution: {0}")]
    Degenerate(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
