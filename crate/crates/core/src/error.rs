use thiserror::Error;

/// Errors produced by the solvers and evaluators in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid ion system: {0}")]
    InvalidIons(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("exponent {exponent:.3e} exceeds the overflow cap {cap}")]
    Overflow { exponent: f64, cap: f64 },
    #[error("zero pivot at row {row} of tridiagonal system")]
    ZeroPivot { row: usize },
    #[error("ion system is not electroneutral (charge imbalance {imbalance:.3e})")]
    NotElectroneutral { imbalance: f64 },
    #[error("Stern coefficient is zero; use the Dirichlet energy instead")]
    ZeroStern,
    #[error("root not bracketed on [{lo}, {hi}]")]
    NotBracketed { lo: f64, hi: f64 },
    #[error("iteration diverged at step {iteration}: sup norm {sup_norm:.3e} exceeds {limit:.3e}")]
    Diverged {
        iteration: usize,
        sup_norm: f64,
        limit: f64,
    },
    #[error("no convergence after {iterations} iterations (last correction {delta:.3e})")]
    NotConverged { iterations: usize, delta: f64 },
    #[error("degenerate input: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
