use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the domain where the requested function is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A matrix that has to be inverted is numerically singular.
    #[error("singular {what} (reciprocal condition estimate {rcond:.3e})")]
    Singular { what: &'static str, rcond: f64 },

    /// Leading coefficient of a matrix polynomial is rank deficient.
    #[error("degenerate matrix polynomial: leading coefficient has rank defect {defect}")]
    PolynomialDegeneracy { defect: usize },

    #[error("eigensolver did not converge: {0}")]
    NonConvergence(String),

    #[error("only {found} admissible eigenvalues, {requested} requested")]
    InsufficientModes { found: usize, requested: usize },

    #[error("no outlier prediction available: {0}")]
    NoPrediction(String),

    #[error("linear algebra backend: {0}")]
    Linalg(#[from] ndarray_linalg::error::LinalgError),
}
