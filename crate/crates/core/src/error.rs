use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is numerically singular: {0}")]
    SingularMatrix(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("unknown method `{0}`")]
    UnknownMethod(String),
    #[error("unknown problem `{0}`")]
    UnknownProblem(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("order q = {q} not supported for {kind} (max {max})")]
    UnsupportedQ {
        kind: &'static str,
        q: usize,
        max: usize,
    },
    #[error("matrix `{0}` is required but absent")]
    MissingMatrix(&'static str),
    #[error("degenerate nodes: {0}")]
    DegenerateNodes(String),
    #[error("point is not on the order-compatibility curve (residual {residual:.3e})")]
    NotOnCurve { residual: f64 },
    #[error("method is not zero-stable (spectral radius {spectral_radius:.6})")]
    NotZeroStable { spectral_radius: f64 },
    #[error("K is singular")]
    SingularK,
    #[error("end set has no simplified-Newton matrix")]
    MissingAtilde,
    #[error("stage Newton iteration diverged: {0}")]
    NewtonDivergence(String),
    #[error("stage Jacobian is singular: {0}")]
    SingularStageJacobian(String),
    #[error("coupled system did not converge: {0}")]
    NoConvergence(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("reference solution failed self-validation: {0}")]
    ReferenceNotConverged(String),
    #[error("epsilon must be positive, got {0}")]
    NonpositiveEpsilon(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
