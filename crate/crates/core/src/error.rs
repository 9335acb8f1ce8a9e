use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LassoError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("weights must be strictly positive (index {index})")]
    NonPositiveWeight { index: usize },
    #[error("radius must be nonnegative and finite")]
    InvalidRadius,
    #[error("regularization mu must be nonnegative and finite")]
    InvalidMu,
    #[error("point is infeasible: weighted norm {norm} exceeds radius {tau}")]
    Infeasible { norm: f64, tau: f64 },
    #[error("face is a single vertex; its difference space is trivial")]
    VertexFace,
    #[error("face basis recurrence underflowed")]
    NumericalUnderflow,
    #[error("objective is unbounded along the ray")]
    UnboundedRay,
    #[error("direction is not a descent direction")]
    NotDescent,
    #[error("line search failed: {0}")]
    LineSearch(String),
    #[error("duality formulation requires {0}")]
    WrongFormulation(&'static str),
    #[error("root finding stalled: dual multiplier vanished")]
    Stalled,
    #[error("invalid generator parameter: {0}")]
    InvalidParameter(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },
}

impl From<std::io::Error> for LassoError {
    fn from(e: std::io::Error) -> Self {
        LassoError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, LassoError>;
