use thiserror::Error;

/// Failure modes shared by every solver in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("bracket failure: {0}")]
    Bracket(String),

    #[error("newton iteration failed at eps = {eps:e}: residual {residual:e} after {iterations} iterations")]
    Newton {
        eps: f64,
        residual: f64,
        iterations: usize,
    },

    #[error("point outside the admissible set: {0}")]
    OutsideDomain(String),

    #[error("unstable time step: {0}")]
    Unstable(String),

    #[error("unknown example `{0}`")]
    UnknownExample(String),
}

impl Error {
    /// Short machine-readable category used in reports.
    pub fn category(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) | Error::NonFinite(_) | Error::UnknownExample(_) => "validation",
            Error::Hypothesis(_) => "hypothesis",
            Error::Bracket(_) | Error::Newton { .. } | Error::Unstable(_) => "solver",
            Error::OutsideDomain(_) => "domain",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(values: &[f64], what: &'static str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}
