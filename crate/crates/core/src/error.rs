use nalgebra::DVector;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {oracle}: expected {expected}, got {got}")]
    DimensionMismatch {
        oracle: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown proximal term kind `{0}`")]
    UnknownProxKind(String),

    /// f2(x) = +inf and g2(y) = +inf at the same query point.
    #[error("lagrangian undefined: primal and dual nonsmooth terms are both infinite")]
    BothInfinite,

    #[error("uncertified configuration: {0}")]
    Uncertified(String),

    #[error("step-size window violated: {0}")]
    WindowViolation(String),

    #[error("inner solver exhausted {iterations} iterations (certified distance {certified_distance:e})")]
    MaxIterations {
        iterations: usize,
        best: DVector<f64>,
        certified_distance: f64,
    },

    #[error("non-finite iterate at iteration {iteration}")]
    Diverged {
        iteration: usize,
        last_x: DVector<f64>,
        last_y: DVector<f64>,
    },

    #[error("singular linear system: {0}")]
    Singular(String),

    #[error("case/data mismatch: {0}")]
    CaseMismatch(String),

    #[error("operation requires a fully quadratic instance: {0}")]
    NotQuadratic(String),

    #[error("oracle check failed: {0}")]
    OracleCheck(String),

    #[error("reference saddle rejected: certificate {0:e} above threshold")]
    ReferenceRejected(f64),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable tag, used by the CLI error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::UnknownProxKind(_) => "unknown_kind",
            Error::BothInfinite => "both_infinite",
            Error::Uncertified(_) => "uncertified",
            Error::WindowViolation(_) => "window_violation",
            Error::MaxIterations { .. } => "max_iterations",
            Error::Diverged { .. } => "diverged",
            Error::Singular(_) => "singular",
            Error::CaseMismatch(_) => "case_mismatch",
            Error::NotQuadratic(_) => "not_quadratic",
            Error::OracleCheck(_) => "oracle_check",
            Error::ReferenceRejected(_) => "reference_rejected",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
        }
    }
}
