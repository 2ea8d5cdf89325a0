use thiserror::Error;

/// Errors raised by the solvers, the estimate checks and the command layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The argument is outside the domain of an unbounded operator.
    #[error("domain error: {0}")]
    Domain(String),

    /// The spectral model cannot support the requested query.
    #[error("model error: {0}")]
    Model(String),

    #[error("unbounded operator: {0}")]
    Unbounded(String),

    #[error("contraction hypothesis violated: Lipschitz bound {lip:.6} exceeds gamma {gamma:.6}")]
    ContractViolation { lip: f64, gamma: f64 },

    #[error("certification failed: {0}")]
    Certification(String),

    #[error("fixed-point iteration did not converge after {iterations} iterations (last distance {last_distance:.3e}, rate estimate {rate:.4})")]
    Divergence { iterations: usize, last_distance: f64, rate: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::Dimension { expected, found });
    }
    Ok(())
}
