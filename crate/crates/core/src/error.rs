use thiserror::Error;

/// Errors raised by kernel construction, factorization checks and the job runner.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain violation: {0}")]
    DomainViolation(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("matrix is not Hermitian (max asymmetry {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("elements are based on different kernels")]
    BaseMismatch,

    #[error("unknown point label `{0}`")]
    UnknownLabel(String),

    #[error("not a factorization: residual {residual:e} exceeds tolerance {tol:e}")]
    NotAFactorization { residual: f64, tol: f64 },

    #[error("label mismatch: {0}")]
    LabelMismatch(String),

    #[error("index {index} out of range for {len} points")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("covariance is singular (min eigenvalue {0:e})")]
    SingularCovariance(f64),

    #[error("Cauchy transform vanishes at z = {0}")]
    CauchyZero(String),

    #[error("b(z) = 1 at z = {0}")]
    BAtOne(String),

    #[error("feature {index} has zero expectation, renormalization undefined")]
    ZeroExpectation { index: usize },

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid point set: {0}")]
    InvalidPoints(String),

    #[error("unknown kernel `{0}`")]
    UnknownKernel(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
