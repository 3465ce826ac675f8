use thiserror::Error;

use crate::sdp::SolveStatus;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (max |H - H^dagger| = {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("invalid density operator: {0}")]
    InvalidDensity(String),

    #[error("invalid witness: {0}")]
    InvalidWitness(String),

    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },

    #[error("state is not bipartite (got {0} subsystems)")]
    NotBipartite(usize),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("LFR is ill-posed at this point (inverse norm estimate {0:.3e})")]
    IllPosed(f64),

    #[error("multiplier condition violated (worst eigenvalue {worst:.3e})")]
    InvalidMultiplier { worst: f64 },

    #[error("solver did not reach an optimal certificate: {status:?}")]
    Solver { status: SolveStatus },

    #[error("malformed matrix file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
