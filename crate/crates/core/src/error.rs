use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("gamma function has a pole at x = {0}")]
    GammaPole(f64),

    #[error("Mittag-Leffler evaluation did not reach tolerance at z = {re}{im:+}i: {detail}")]
    AccuracyNotReached { re: f64, im: f64, detail: String },

    #[error("matrix is not diagonalizable (eigenvector condition number {0:.3e})")]
    NonDiagonalizable(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("Fourier coefficients violate realness symmetry: {0}")]
    SymmetryViolation(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("t = {t} lies outside the history domain (-inf, {t0}]")]
    OutOfDomain { t: f64, t0: f64 },

    #[error("history derivative is undefined at kink t = {0}")]
    Kink(f64),

    #[error("forcing term does not exist: {0}")]
    DivergentForcing(String),

    #[error("forcing term is unbounded near t0: {0}")]
    SingularForcing(String),

    #[error("integration produced a non-finite state; last valid time t = {last_valid_time}")]
    NonFinite { last_valid_time: f64 },

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("iteration failed: {0}")]
    IterationFailure(String),

    #[error("Re(lambda) = {0} < 0: not a valid Floquet exponent")]
    InvalidClassification(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
