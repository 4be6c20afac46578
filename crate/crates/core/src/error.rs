use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix of size {rows}x{cols} is not square")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension {0} is not a perfect square")]
    NotPerfectSquare(usize),
    #[error("entries length {found} does not match {rows}x{cols}")]
    EntryCount { rows: usize, cols: usize, found: usize },
    #[error("matrix contains a non-finite entry")]
    NonFinite,
    #[error("matrix is not Hermitian: deviation {deviation:e} exceeds tolerance {tol:e}")]
    NotHermitian { deviation: f64, tol: f64 },
    #[error("invalid subsystem shape: {0}")]
    InvalidShape(String),
    #[error("keep-set must be a non-empty proper subset of the tensor factors")]
    InvalidKeepSet,
    #[error("eigenvalue solver failed to converge")]
    EigenNonConvergence,
    #[error("eigenvalue {0:e} is below the clamping threshold")]
    NegativeEigenvalue(f64),
    #[error("not a valid state: {0}")]
    InvalidState(String),
    #[error("matrix is not unitary: deviation {0:e}")]
    NotUnitary(f64),
    #[error("vector is not normalized: norm {0}")]
    NotNormalized(f64),
    #[error("basis is not orthonormal: deviation {0:e}")]
    NotOrthonormal(f64),
    #[error("Kraus operators violate sum X^dag X <= I by {0:e}")]
    KrausInequality(f64),
    #[error("Kraus set must contain at least one operator")]
    EmptyKraus,
    #[error("index {index} out of range for {len} elements")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("outcome has probability {0:e} and cannot occur")]
    ImpossibleOutcome(f64),
    #[error("ambient dimension {dim} exceeds the supported maximum {max}")]
    DimensionGuard { dim: usize, max: usize },
    #[error("negative entry {0} in a state spectrum")]
    NegativeEntry(f64),
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    #[error("gauged entropy is defined for normalized states only")]
    Subnormalized,
    #[error("duality violated: pairing {0:e} is negative")]
    DualityViolation(f64),
    #[error("not an extended POVM element: {0}")]
    InvalidEffect(String),
    #[error("not a valid map: {0}")]
    InvalidMap(String),
    #[error("unknown {kind} '{name}'")]
    UnknownName { kind: &'static str, name: String },
    #[error("no witness found: best gap {best:e} does not exceed {threshold:e}")]
    NoWitness { best: f64, threshold: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
