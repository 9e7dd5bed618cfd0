use thiserror::Error;

use crate::halfline::Side;

/// Errors raised by the operator, function-space and resolvent layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (relative defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("matrix is not unitary (defect {defect:.3e})")]
    NotUnitary { defect: f64 },

    #[error("eigendecomposition failed to reconstruct the matrix (relative defect {defect:.3e})")]
    EigenFailure { defect: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("t = {t} lies outside the {side:?} half-line anchored at {anchor}")]
    OutOfDomain { t: f64, side: Side, anchor: f64 },

    #[error("half-line functions live on different half-lines")]
    SideMismatch,

    #[error("anchor mismatch: expected {expected}, found {found}")]
    AnchorMismatch { expected: f64, found: f64 },

    #[error("atom rate {re}{im:+}i does not decay on the {side:?} half-line")]
    InvalidRate { re: f64, im: f64, side: Side },

    #[error("endpoints must satisfy a < b (got a = {a}, b = {b})")]
    InvalidEndpoints { a: f64, b: f64 },

    #[error("function violates the boundary condition u2(b) = W u1(a) (defect {defect:.3e})")]
    NotInDomain { defect: f64 },

    #[error("|Im lambda| = {imag:.3e} is below the resolvent threshold {min_imag:.3e}")]
    TooCloseToRealAxis { imag: f64, min_imag: f64 },

    #[error("lambda lies in the wrong half-plane (Im lambda = {imag})")]
    WrongHalfPlane { imag: f64 },

    #[error("resonant kernel: rate and spectral parameter cancel (|denominator| = {modulus:.3e})")]
    DegenerateKernel { modulus: f64 },

    #[error("vector must be nonzero")]
    ZeroVector,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
