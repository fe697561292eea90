use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("dimension mismatch: expected {expected}, got {actual} ({context})")]
    DimensionMismatch { expected: usize, actual: usize, context: &'static str },

    #[error("matrix is singular or not positive definite: {0}")]
    Singular(String),

    #[error("LMI problem is infeasible (best phase-I margin {margin:.3e})")]
    Infeasible {
        /// Largest achievable `s` with `F(x) - s I >= 0`; non-positive when infeasible.
        margin: f64,
        /// Unit vector `z` with `z^H F(x) z = lambda_min(F(x))` at the phase-I optimum.
        certificate: Vec<num_complex::Complex64>,
    },

    #[error("LMI objective is unbounded above")]
    Unbounded,

    #[error("barrier method did not converge after {iterations} Newton steps (gap bound {gap:.3e})")]
    NonConvergence { iterations: usize, gap: f64, best: Vec<f64> },
}
