//! Error type shared across the toolkit.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("q is a root of unity of order {order}")]
    RootOfUnity { order: usize },

    #[error("site {site} out of range for chain of {sites} sites")]
    SiteOutOfRange { site: usize, sites: usize },

    #[error("evaluation point too close to a pole (|denominator| = {magnitude:.3e})")]
    PoleProximity { magnitude: f64 },

    #[error("degenerate parameters: {0}")]
    DegenerateParameters(String),

    #[error("unsupported family N = {0} (only N = 1, 2 are implemented)")]
    UnsupportedFamily(usize),

    #[error("eigen-iteration failed to converge: {0}")]
    NonConvergence(String),

    #[error("matrix is defective beyond tolerance: {0}")]
    Defective(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("spectral mismatch between recurrence and direct diagonalization (max deviation {deviation:.3e})")]
    SpectralMismatch { deviation: f64 },

    #[error("no solution found within iteration budget (best residual {best_residual:.3e})")]
    NoSolution { best_residual: f64 },
}
