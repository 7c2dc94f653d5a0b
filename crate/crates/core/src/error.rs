use thiserror::Error;

pub type Result<T> = std::result::Result<T, LipError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LipError {
    #[error("dimension mismatch: expected length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("gradient is identically zero")]
    ZeroGradient,

    #[error("least-squares system is numerically singular")]
    SingularSystem,

    #[error("point is not in the cone K(eps)")]
    NotInCone,

    #[error("point lies on the boundary of the cone K(eps)")]
    BoundaryOfCone,

    #[error("dual point is outside the domain of l (<lambda, x> - eps ||lambda|| <= 0)")]
    NotInLambda,

    #[error("invalid bounds: {0}")]
    InvalidBounds(String),

    #[error("degenerate instance: ||x|| = {norm_x} must exceed eps = {eps}")]
    Degenerate { norm_x: f64, eps: f64 },

    #[error("problem is not strictly feasible: least-squares residual {residual} >= eps {eps}")]
    Infeasible { residual: f64, eps: f64 },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("line-search direction has phi(d) = 0")]
    DegenerateDirection,

    #[error("step sizes violate sigma * tau * ||phi||^2 <= 1 (got {product})")]
    StepSizeViolation { product: f64 },

    #[error("iterate left the cone K(eps_bar) at iteration {iteration}; shrink the step size")]
    ConeViolation { iteration: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl LipError {
    /// True for the errors that mean "this problem has no strictly feasible point".
    pub fn is_infeasible(&self) -> bool {
        matches!(self, LipError::Infeasible { .. } | LipError::Degenerate { .. })
    }
}
