//! Euclidean space, hyperbolic space and the round sphere as conformal
//! charts `g = h(x)^2 <.,.>` on `R^n`:
//!
//! * Euclidean: `h = 1`, origin `0`;
//! * hyperbolic (upper half-space `x_n > 0`): `h = 1/x_n`, origin `e_n`;
//! * spherical (stereographic chart from the south pole): `h = 2/(1+|x|^2)`,
//!   origin `0`; the open unit ball is the upper hemisphere.
//!
//! Closed forms are evaluated in the linear ambient models (see [`ambient`]).

mod ambient;
mod hyperplane;
mod isometry;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Vector, MAX_DIM};

pub use hyperplane::{GeodesicHyperplane, HyperplaneShape};
pub use isometry::{ChartIsometry, IsometryStep};

/// Default distance kept from the equator in hemisphere mode.
pub const HEMISPHERE_GUARD: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Euclidean,
    Hyperbolic,
    Spherical,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Euclidean => "euclidean",
            ModelKind::Hyperbolic => "hyperbolic",
            ModelKind::Spherical => "spherical",
        })
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "euclidean" | "r" => Ok(ModelKind::Euclidean),
            "hyperbolic" | "h" => Ok(ModelKind::Hyperbolic),
            "spherical" | "s" => Ok(ModelKind::Spherical),
            other => Err(Error::InvalidArgument(format!("unknown model `{other}`"))),
        }
    }
}

/// One of the three model spaces in a fixed dimension.
///
/// In hemisphere mode the spherical chart is restricted to the open unit ball
/// shrunk by [`HEMISPHERE_GUARD`]; the flag has no effect on other models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceForm {
    pub kind: ModelKind,
    pub dim: usize,
    #[serde(default)]
    pub hemisphere: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub model: SpaceForm,
    pub coords: Vector,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TangentVector {
    pub base: ChartPoint,
    pub comps: Vector,
}

impl SpaceForm {
    pub fn new(kind: ModelKind, dim: usize) -> Result<Self> {
        if !(2..MAX_DIM).contains(&dim) {
            return Err(Error::UnsupportedDimension(dim));
        }
        Ok(Self {
            kind,
            dim,
            hemisphere: false,
        })
    }

    pub fn euclidean(dim: usize) -> Self {
        Self::new(ModelKind::Euclidean, dim).expect("supported dimension")
    }

    pub fn hyperbolic(dim: usize) -> Self {
        Self::new(ModelKind::Hyperbolic, dim).expect("supported dimension")
    }

    pub fn spherical(dim: usize) -> Self {
        Self::new(ModelKind::Spherical, dim).expect("supported dimension")
    }

    pub fn with_hemisphere(mut self, on: bool) -> Self {
        self.hemisphere = on;
        self
    }

    /// Sectional curvature: 0, -1 or +1.
    pub fn curvature(&self) -> f64 {
        match self.kind {
            ModelKind::Euclidean => 0.0,
            ModelKind::Hyperbolic => -1.0,
            ModelKind::Spherical => 1.0,
        }
    }

    /// The chart origin `o`.
    pub fn origin(&self) -> ChartPoint {
        let coords = match self.kind {
            ModelKind::Hyperbolic => Vector::basis(self.dim, self.dim - 1),
            _ => Vector::zeros(self.dim),
        };
        ChartPoint { model: *self, coords }
    }

    pub fn in_domain(&self, x: &Vector) -> bool {
        if x.len() != self.dim || !x.is_finite() {
            return false;
        }
        match self.kind {
            ModelKind::Euclidean => true,
            ModelKind::Hyperbolic => x[self.dim - 1] > 0.0,
            ModelKind::Spherical => !self.hemisphere || x.norm() < 1.0 - HEMISPHERE_GUARD,
        }
    }

    /// Validated chart point.
    pub fn point(&self, coords: &[f64]) -> Result<ChartPoint> {
        self.point_from(Vector::from_slice(coords))
    }

    pub fn point_from(&self, coords: Vector) -> Result<ChartPoint> {
        if coords.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: coords.len(),
            });
        }
        if !self.in_domain(&coords) {
            return Err(Error::OutsideDomain {
                model: self.kind,
                coords: coords.as_slice().to_vec(),
            });
        }
        Ok(ChartPoint { model: *self, coords })
    }

    /// Conformal factor `h(x)`.
    #[inline]
    pub fn conformal_factor(&self, x: &Vector) -> f64 {
        match self.kind {
            ModelKind::Euclidean => 1.0,
            ModelKind::Hyperbolic => 1.0 / x[self.dim - 1],
            ModelKind::Spherical => 2.0 / (1.0 + x.norm_squared()),
        }
    }

    /// Euclidean gradient of `log h` at `x`.
    pub fn grad_log_factor(&self, x: &Vector) -> Vector {
        match self.kind {
            ModelKind::Euclidean => Vector::zeros(self.dim),
            ModelKind::Hyperbolic => Vector::basis(self.dim, self.dim - 1) * (-1.0 / x[self.dim - 1]),
            ModelKind::Spherical => *x * (-2.0 / (1.0 + x.norm_squared())),
        }
    }

    /// Euclidean gradient of `h` at `x`.
    pub fn grad_factor(&self, x: &Vector) -> Vector {
        self.grad_log_factor(x) * self.conformal_factor(x)
    }

    /// Christoffel symbols of `g = e^{2f} <.,.>`, `f = log h`, contracted with
    /// `v` twice: the `k`-th entry is `sum_ij Gamma^k_ij v_i v_j`.
    pub fn christoffel_contract(&self, x: &Vector, v: &Vector) -> Vector {
        let df = self.grad_log_factor(x);
        (*v * (2.0 * df.dot(v))).axpy(-v.norm_squared(), &df)
    }

    pub fn tangent(&self, base: &ChartPoint, comps: &[f64]) -> Result<TangentVector> {
        self.check_point(base)?;
        if comps.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: comps.len(),
            });
        }
        Ok(TangentVector {
            base: *base,
            comps: Vector::from_slice(comps),
        })
    }

    fn check_point(&self, p: &ChartPoint) -> Result<()> {
        if p.model.kind != self.kind {
            return Err(Error::ModelMismatch(self.kind, p.model.kind));
        }
        if p.coords.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: p.coords.len(),
            });
        }
        if !self.in_domain(&p.coords) {
            return Err(Error::OutsideDomain {
                model: self.kind,
                coords: p.coords.as_slice().to_vec(),
            });
        }
        Ok(())
    }

    fn check_based_at(&self, p: &ChartPoint, v: &TangentVector) -> Result<()> {
        let scale = 1.0 + p.coords.max_abs();
        if v.base.model.kind != p.model.kind || (v.base.coords - p.coords).max_abs() > 1e-12 * scale {
            return Err(Error::BaseMismatch);
        }
        if v.comps.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: v.comps.len(),
            });
        }
        Ok(())
    }

    /// `g_p(v, w) = h(p)^2 v.w`.
    pub fn metric_at(&self, p: &ChartPoint, v: &TangentVector, w: &TangentVector) -> Result<f64> {
        self.check_point(p)?;
        self.check_based_at(p, v)?;
        self.check_based_at(p, w)?;
        let h = self.conformal_factor(&p.coords);
        Ok(h * h * v.comps.dot(&w.comps))
    }

    /// Metric norm `|v|_p`.
    pub fn norm(&self, v: &TangentVector) -> f64 {
        self.conformal_factor(&v.base.coords) * v.comps.norm()
    }

    /// Geodesic distance, closed form per model.
    pub fn distance(&self, p: &ChartPoint, q: &ChartPoint) -> Result<f64> {
        self.check_point(p)?;
        self.check_point(q)?;
        Ok(self.chart_distance(&p.coords, &q.coords))
    }

    /// Distance between raw chart coordinates (no domain checks).
    #[inline]
    pub fn chart_distance(&self, x: &Vector, y: &Vector) -> f64 {
        let gap = (*x - *y).norm();
        match self.kind {
            ModelKind::Euclidean => gap,
            ModelKind::Spherical => {
                let denom = ((1.0 + x.norm_squared()) * (1.0 + y.norm_squared())).sqrt();
                2.0 * (gap / denom).min(1.0).asin()
            }
            ModelKind::Hyperbolic => {
                let n = self.dim;
                2.0 * (gap / (2.0 * (x[n - 1] * y[n - 1]).sqrt())).asinh()
            }
        }
    }

    /// Exponential map.
    pub fn exp_map(&self, p: &ChartPoint, v: &TangentVector) -> Result<ChartPoint> {
        self.check_point(p)?;
        self.check_based_at(p, v)?;
        let len = self.norm(v);
        if self.kind == ModelKind::Spherical && len >= std::f64::consts::PI {
            return Err(Error::CutLocus);
        }
        let coords = self.exp_raw(&p.coords, &v.comps);
        self.point_from(coords)
    }

    /// Exponential map on raw coordinates; the caller guarantees validity.
    pub fn exp_raw(&self, x: &Vector, v: &Vector) -> Vector {
        match self.kind {
            ModelKind::Euclidean => *x + *v,
            _ => {
                let big_x = self.to_ambient(x);
                let w = self.push_tangent(x, v);
                let len = self.ambient_inner(&w, &w).max(0.0).sqrt();
                if len == 0.0 {
                    return *x;
                }
                let y = self.ambient_geodesic(&big_x, &(w * (1.0 / len)), len);
                self.from_ambient(&self.renormalize(&y))
            }
        }
    }

    /// Logarithm map: the initial velocity of the minimizing geodesic from
    /// `p` reaching `q` at time 1.
    pub fn log_map(&self, p: &ChartPoint, q: &ChartPoint) -> Result<TangentVector> {
        self.check_point(p)?;
        self.check_point(q)?;
        if self.kind == ModelKind::Spherical {
            let d = self.chart_distance(&p.coords, &q.coords);
            if d >= std::f64::consts::PI - 1e-9 {
                return Err(Error::CutLocus);
            }
        }
        Ok(TangentVector {
            base: *p,
            comps: self.log_raw(&p.coords, &q.coords),
        })
    }

    /// Logarithm map on raw coordinates.
    pub fn log_raw(&self, x: &Vector, y: &Vector) -> Vector {
        match self.kind {
            ModelKind::Euclidean => *y - *x,
            _ => {
                let d = self.chart_distance(x, y);
                if d == 0.0 {
                    return Vector::zeros(self.dim);
                }
                let big_x = self.to_ambient(x);
                let big_y = self.to_ambient(y);
                let w = self.ambient_log(&big_x, &big_y, d);
                self.pull_tangent(x, &w)
            }
        }
    }

    /// Ambient logarithm given the (already known) distance `d`.
    pub fn ambient_log(&self, big_x: &Vector, big_y: &Vector, d: f64) -> Vector {
        let diff = *big_y - *big_x;
        // Component of Y - X tangent at X, written to avoid cancellation.
        let u = match self.kind {
            ModelKind::Euclidean => return diff,
            ModelKind::Spherical => diff.axpy(0.5 * diff.norm_squared(), big_x),
            ModelKind::Hyperbolic => diff.axpy(-0.5 * self.ambient_inner(&diff, &diff), big_x),
        };
        let len = self.ambient_inner(&u, &u).max(0.0).sqrt();
        if len == 0.0 {
            return u;
        }
        u * (d / len)
    }

    /// `gamma(t) = exp_p(t v)` for a unit vector `v`.
    pub fn geodesic(&self, p: &ChartPoint, v: &TangentVector, t: f64) -> Result<ChartPoint> {
        self.check_point(p)?;
        self.check_based_at(p, v)?;
        let len = self.norm(v);
        if (len - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidArgument(format!(
                "geodesic needs a unit vector, got metric norm {len}"
            )));
        }
        if !t.is_finite() || (self.kind == ModelKind::Spherical && t.abs() >= std::f64::consts::PI) {
            return Err(Error::ParameterOutOfRange(t));
        }
        let coords = self.exp_raw(&p.coords, &(v.comps * t));
        self.point_from(coords).map_err(|_| Error::ParameterOutOfRange(t))
    }

    /// Parallel transport `tau_p^q` along the minimizing geodesic.
    pub fn parallel_transport(&self, p: &ChartPoint, q: &ChartPoint, v: &TangentVector) -> Result<TangentVector> {
        self.check_point(p)?;
        self.check_point(q)?;
        self.check_based_at(p, v)?;
        if self.kind == ModelKind::Spherical {
            let d = self.chart_distance(&p.coords, &q.coords);
            if d >= std::f64::consts::PI - 1e-9 {
                return Err(Error::CutLocus);
            }
        }
        Ok(TangentVector {
            base: *q,
            comps: self.transport_raw(&p.coords, &q.coords, &v.comps),
        })
    }

    /// Parallel transport on raw coordinates.
    pub fn transport_raw(&self, x: &Vector, y: &Vector, v: &Vector) -> Vector {
        match self.kind {
            ModelKind::Euclidean => *v,
            _ => {
                let big_x = self.to_ambient(x);
                let big_y = self.to_ambient(y);
                let w = self.push_tangent(x, v);
                let moved = self.ambient_transport(&big_x, &big_y, &w);
                self.pull_tangent(y, &moved)
            }
        }
    }

    /// Ambient parallel transport of `w` (tangent at `X`) to `Y`.
    pub fn ambient_transport(&self, big_x: &Vector, big_y: &Vector, w: &Vector) -> Vector {
        let sum = *big_x + *big_y;
        match self.kind {
            ModelKind::Euclidean => *w,
            ModelKind::Spherical => {
                let coef = big_y.dot(w) / (1.0 + big_x.dot(big_y));
                w.axpy(-coef, &sum)
            }
            ModelKind::Hyperbolic => {
                let coef = self.ambient_inner(big_y, w) / (1.0 - self.ambient_inner(big_x, big_y));
                w.axpy(coef, &sum)
            }
        }
    }
}

impl ChartPoint {
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn ambient(&self) -> Vector {
        self.model.to_ambient(&self.coords)
    }

    pub fn conformal_factor(&self) -> f64 {
        self.model.conformal_factor(&self.coords)
    }

    pub fn tangent(&self, comps: Vector) -> TangentVector {
        TangentVector { base: *self, comps }
    }
}

impl TangentVector {
    pub fn norm(&self) -> f64 {
        self.base.model.norm(self)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            base: self.base,
            comps: self.comps * s,
        }
    }

    /// The same direction rescaled to unit metric norm.
    pub fn unit(&self) -> Result<Self> {
        let len = self.norm();
        if !(len > 0.0) || !len.is_finite() {
            return Err(Error::ZeroVector);
        }
        Ok(self.scaled(1.0 / len))
    }
}
