use thiserror::Error;

use crate::model::{ValidationReport, Vector};

pub type Result<T, E = QpError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QpError {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("common head dimension {requested} exceeds the padding cap {cap}")]
    PadOverflow { requested: usize, cap: usize },

    #[error("symmetric eigensolver did not converge within {sweeps} sweeps")]
    ConvergenceFailure { sweeps: usize },

    #[error("constraint {index} has no strictly feasible point (minimum value {min_value})")]
    NoSlaterPoint { index: usize, min_value: f64 },

    #[error("no feasible point could be produced")]
    InfeasibleProblem,

    #[error("no nonnegative multiplier makes the combined operator positive semidefinite")]
    NoPsdShift,

    /// Carries a descent ray and base point when one was constructed.
    #[error("objective is not bounded below on the feasible set")]
    NotBoundedBelow {
        ray: Option<Vector>,
        base: Option<Vector>,
    },

    #[error("multiplier sits on the psd boundary but no retraction direction exists")]
    HardCaseNoRay,

    #[error("precondition violated: {0}")]
    PreconditionViolation(String),

    #[error("sublevel set is empty on the search grid")]
    EmptyLevelSet,

    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("validation failed: {0}")]
    Validation(ValidationReport),
}
