use thiserror::Error;

pub type Result<T, E = HardyError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum HardyError {
    #[error("mu below Hardy threshold {mu0} (got mu = {mu})")]
    BelowHardyThreshold { mu: f64, mu0: f64 },

    #[error("dimension must be at least 3 (got {0})")]
    UnsupportedDimension(usize),

    #[error("dual problem requires mu > (3/4)·mu0 = {threshold} (got mu = {mu})")]
    NotDualSolvable { mu: f64, threshold: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point r = {r} outside [{lo}, {hi}]")]
    OutOfDomain { r: f64, lo: f64, hi: f64 },

    #[error("mesh mismatch: {0}")]
    MeshMismatch(String),

    #[error("singular tridiagonal system (zero pivot at row {row})")]
    SingularSystem { row: usize },

    #[error("solver tolerance not reached: scaled residual {residual:e} > {tolerance:e}")]
    ToleranceNotReached { residual: f64, tolerance: f64 },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("divergent integral: {0}")]
    Divergent(String),
}

impl HardyError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        HardyError::InvalidArgument(msg.into())
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            HardyError::SingularSystem { .. }
                | HardyError::ToleranceNotReached { .. }
                | HardyError::Divergent(_)
        )
    }
}
