use thiserror::Error;

use crate::spaceform::ModelKind;

/// Failures raised by the geometry kernel and the analysis pipeline built on it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unsupported dimension {0} (supported range is 2..=7)")]
    UnsupportedDimension(usize),

    #[error("model mismatch between {0:?} and {1:?}")]
    ModelMismatch(ModelKind, ModelKind),

    #[error("tangent vector is based at a different point than expected")]
    BaseMismatch,

    #[error("point {coords:?} lies outside the {model:?} chart domain")]
    OutsideDomain { model: ModelKind, coords: Vec<f64> },

    #[error("geodesic parameter {0} lies outside the admissible interval")]
    ParameterOutOfRange(f64),

    #[error("points are conjugate or antipodal: no unique minimizing geodesic")]
    CutLocus,

    #[error("inversion singularity: point coincides with the inversion center")]
    InversionSingularity,

    #[error("degenerate frame: vectors do not span a hyperplane")]
    DegenerateFrame,

    #[error("zero tangent vector where a direction is required")]
    ZeroVector,

    #[error("invalid surface: {0}")]
    InvalidSurface(String),

    #[error("degenerate parametrization at direction {0:?}")]
    DegenerateParametrization(Vec<f64>),

    #[error("curvature operator domain violation: {0}")]
    OperatorDomain(String),

    #[error("empty sample grid")]
    EmptyGrid,

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("moving plane produced an empty cap")]
    EmptyCap,

    #[error("projection onto the foliation geodesic is not unique")]
    NonUniqueProjection,

    #[error("no intersection with the target sheet within the search range")]
    NoIntersection,

    #[error("surface is not star-shaped about the given center: {0}")]
    NotStarShaped(String),

    #[error("touching-ball estimate is not positive ({0}); surface self-intersects")]
    SelfIntersection(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
