use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("argument out of domain: {0}")]
    Domain(String),

    /// The renewal series hit its term cap while the last term was still
    /// above the tail tolerance. `partial_sum` holds what was accumulated.
    #[error(
        "renewal series not converged at t={t}: {terms} terms, last term {last_term:e}, partial sum {partial_sum}"
    )]
    SeriesNotConverged {
        t: f64,
        terms: usize,
        last_term: f64,
        partial_sum: f64,
    },

    #[error("insufficient data: need at least {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("singular regression")]
    Singular,
}

pub(crate) fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg()))
    }
}
