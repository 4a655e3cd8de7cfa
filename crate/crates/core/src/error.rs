use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("infinite angle between planes (smallest singular value {sigma_min:e})")]
    InfiniteAngle { sigma_min: f64 },

    #[error("samples {i} and {j} project to the same point of V but have distinct graph values")]
    DegenerateRatio { i: usize, j: usize },

    #[error("region holds {size} points, cap is {cap}")]
    RegionTooLarge { size: usize, cap: usize },

    #[error("no coefficient value for cube {0}")]
    MissingCube(usize),

    #[error("points {i} and {j} of the net share a projection")]
    ProjectionCollision { i: usize, j: usize },

    #[error("forest parameters violate K >= 2*K0*(1 + 1/eta) + 1 (K = {k}, bound {bound})")]
    KConstraint { k: f64, bound: f64 },
}

impl Error {
    pub(crate) fn param(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { field: field.into(), reason: reason.into() }
    }
}
