use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Invalid parameters or incompatible inputs.
    #[error("configuration error: {0}")]
    Config(String),

    /// Argument outside the domain of a mathematical formula.
    #[error("domain error: {0}")]
    Domain(String),

    /// A result could not be trusted, with advice on how to fix the setup.
    #[error("diagnostics error: {0}")]
    Diagnostics(String),

    /// Ratio with a vanishing denominator.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// An approximate update hit a (near) zero denominator.
    #[error("singular update at iteration {iteration}: min |denominator| = {min_denominator:e}")]
    Singular { iteration: usize, min_denominator: f64 },

    /// The iterative series left its radius of convergence.
    #[error("divergence at iteration {iteration}: {reason}")]
    Divergence {
        iteration: usize,
        reason: String,
        history: Vec<f64>,
    },

    /// The initial-state amplitude vanished, so the wave operator is undefined.
    #[error("model-space breakdown: |psi_i| = {amplitude:e}")]
    ModelSpaceBreakdown { amplitude: f64 },

    /// Generic floating-point failure (non-finite values, failed solves).
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
