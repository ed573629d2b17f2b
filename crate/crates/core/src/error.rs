use thiserror::Error;

/// Errors raised by the numerical kernel, the partition calculus and the checkers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension {0} exceeds the guard of {max}", max = crate::MAX_DIM)]
    DimensionGuard(usize),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("matrix contains a non-finite entry at ({0}, {1})")]
    NonFinite(usize, usize),

    #[error("matrix is not Hermitian (max |M - M†| = {0:.3e})")]
    NotHermitian(f64),

    #[error("trace is not 1 (got {0})")]
    InvalidTrace(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),

    #[error("Jacobi eigensolver did not converge after {0} sweeps")]
    NoConvergence(usize),

    #[error("invalid layout: {0}")]
    Layout(String),

    #[error("unknown party label `{0}`")]
    UnknownLabel(String),

    #[error("invalid partition: {0}")]
    Partition(String),

    #[error("invalid coarsening move: {0}")]
    InvalidMove(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid entropy parameter: {0}")]
    EntropyParameter(String),

    #[error("invalid MQMI specification: {0}")]
    Spec(String),

    #[error("state is not pure (purity {0:.12})")]
    NotPure(f64),

    #[error("state file: {0}")]
    StateFile(String),

    #[error("unknown name `{0}`")]
    UnknownName(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
