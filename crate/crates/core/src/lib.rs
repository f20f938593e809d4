//! Quantitative Alexandrov analysis in the three space forms.
//!
//! * [`spaceform`]: the model spaces as conformal charts with exact
//!   distances, exponential/logarithm maps, parallel transport, totally
//!   geodesic hyperplanes and isometries.
//! * [`hypersurface`]: star-shaped closed hypersurfaces, their principal
//!   curvatures, curvature operators, area and touching-ball radius.
//! * [`moving_planes`]: the moving-plane procedure with critical positions,
//!   caps, tangency points and symmetry defects.
//! * [`stability`]: centers, inradius/circumradius and the radial graph,
//!   assembled into a stability report.
//! * [`estimates`]: margin checks for the intermediate distance, graph,
//!   normal-stability and projected-curvature inequalities.

// `!(x > 0.0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimates;
pub mod hypersurface;
pub mod linalg;
pub mod moving_planes;
pub mod optimize;
pub mod spaceform;
pub mod stability;
pub mod tolerance;

pub use error::{Error, Result};
pub use linalg::Vector;
pub use spaceform::{ChartIsometry, ChartPoint, GeodesicHyperplane, ModelKind, SpaceForm, TangentVector};
pub use tolerance::Tolerances;
