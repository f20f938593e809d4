//! Star-shaped closed hypersurfaces `S = dOmega` given by a geodesic radius
//! function over the unit directions at a base point.
//!
//! Surfaces live in dimension `n = 2` (curves) or `n = 3`. Points are
//! produced in the ambient linear model, `X(u) = cs(r) B + sn(r) sum u_i E_i`
//! with `r = rho(u)`, and projected to the chart only where chart
//! coordinates are needed; containment tests stay in the ambient model.

mod curvature;
mod export;
pub mod grid;
mod operator;
mod sampled;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::optimize::{bisect, legendre_with_derivative};
use crate::spaceform::{ChartPoint, ModelKind, SpaceForm, TangentVector};

pub use curvature::SurfaceSample;
pub use export::write_samples_csv;
pub use grid::{direction_chart, fibonacci_directions, tangent_basis, DirectionGrid, GridSpec, DEFAULT_LEVEL};
pub use operator::{elementary_symmetric, AdmissibilityReport, CurvatureOperator, CustomOperator};
pub use sampled::{CurvatureSummary, SampledSurface, VolumeQuadrature};

/// Largest geodesic radius allowed in the spherical model; keeps `S` inside
/// the open hemisphere around the base.
pub const SPHERICAL_RADIUS_LIMIT: f64 = std::f64::consts::FRAC_PI_2 - 1e-6;

/// Fixed low-order polynomial on the direction sphere used by perturbed
/// spheres.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Harmonic {
    /// `u_1 u_2`, range `[-1/2, 1/2]`.
    Xy,
    /// Legendre polynomial `P_l(u_1)`, range `[-1, 1]`.
    Zonal(usize),
}

impl Harmonic {
    pub fn eval(&self, u: &Vector) -> f64 {
        match *self {
            Harmonic::Xy => u[0] * u[1],
            Harmonic::Zonal(l) => legendre_with_derivative(l, u[0]).0,
        }
    }

    /// Smallest and largest value over the unit sphere.
    pub fn range(&self) -> (f64, f64) {
        match *self {
            Harmonic::Xy => (-0.5, 0.5),
            Harmonic::Zonal(0) => (1.0, 1.0),
            Harmonic::Zonal(l) if l % 2 == 1 => (-1.0, 1.0),
            Harmonic::Zonal(l) => {
                // Even Legendre polynomials reach their minimum inside (-1, 1).
                let min = (0..=2000)
                    .map(|k| legendre_with_derivative(l, k as f64 / 2000.0).0)
                    .fold(f64::INFINITY, f64::min);
                (min, 1.0)
            }
        }
    }
}

impl std::fmt::Display for Harmonic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Harmonic::Xy => write!(f, "xy"),
            Harmonic::Zonal(l) => write!(f, "zonal{l}"),
        }
    }
}

impl std::str::FromStr for Harmonic {
    type Err = Error;

    /// `xy`, or `zonal<l>` / `zonal:<l>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        if s == "xy" {
            return Ok(Harmonic::Xy);
        }
        s.strip_prefix("zonal")
            .map(|l| l.trim_start_matches(':'))
            .and_then(|l| l.parse().ok())
            .map(Harmonic::Zonal)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown harmonic `{s}` (expected xy or zonal<l>)")))
    }
}

/// Analytic test families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SurfaceFamily {
    /// Distance sphere of the given geodesic radius about the base.
    GeodesicSphere { radius: f64 },
    /// Ellipsoid in chart coordinates, centered at the base with semi-axes
    /// along the frame directions, read in the model metric.
    ChartEllipsoid { axes: Vec<f64> },
    /// `rho(u) = radius (1 + eps Y(u))`.
    PerturbedSphere { radius: f64, eps: f64, harmonic: Harmonic },
}

impl SurfaceFamily {
    pub fn name(&self) -> &'static str {
        match self {
            SurfaceFamily::GeodesicSphere { .. } => "geodesic_sphere",
            SurfaceFamily::ChartEllipsoid { .. } => "chart_ellipsoid",
            SurfaceFamily::PerturbedSphere { .. } => "perturbed_sphere",
        }
    }

    /// Spheroid `(1 + eps, 1, ..., 1)`.
    pub fn spheroid(dim: usize, eps: f64) -> Self {
        let mut axes = vec![1.0; dim];
        axes[0] += eps;
        SurfaceFamily::ChartEllipsoid { axes }
    }
}

/// Where a point sits relative to `Omega`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Containment {
    Inside,
    Boundary,
    Outside,
}

#[derive(Debug, Clone)]
pub struct RadialSurface {
    pub model: SpaceForm,
    pub base: ChartPoint,
    /// Metric-orthonormal frame at the base; direction `u` means
    /// `sum u_i frame_i`.
    pub frame: Vec<TangentVector>,
    pub family: SurfaceFamily,
    ambient_base: Vector,
    ambient_frame: Vec<Vector>,
    /// Euclidean-unit chart directions of the frame.
    chart_axes: Vec<Vector>,
    scale: f64,
    min_radius: f64,
}

impl RadialSurface {
    pub fn new(model: SpaceForm, base: ChartPoint, frame: Vec<TangentVector>, family: SurfaceFamily) -> Result<Self> {
        let n = model.dim;
        if n != 2 && n != 3 {
            return Err(Error::InvalidSurface(format!("surfaces are supported for n = 2 and n = 3, not {n}")));
        }
        if base.model.kind != model.kind || base.dim() != n || !model.in_domain(&base.coords) {
            return Err(Error::InvalidSurface("base point is not a point of the model".into()));
        }
        if frame.len() != n {
            return Err(Error::DegenerateFrame);
        }
        let h = model.conformal_factor(&base.coords);
        for (i, a) in frame.iter().enumerate() {
            if (a.base.coords - base.coords).max_abs() > 1e-12 {
                return Err(Error::BaseMismatch);
            }
            for (j, b) in frame.iter().enumerate() {
                let g = h * h * a.comps.dot(&b.comps);
                let expect = if i == j { 1.0 } else { 0.0 };
                if (g - expect).abs() > 1e-9 {
                    return Err(Error::DegenerateFrame);
                }
            }
        }
        match &family {
            SurfaceFamily::GeodesicSphere { radius } => positive("radius", *radius)?,
            SurfaceFamily::ChartEllipsoid { axes } => {
                if axes.len() != n {
                    return Err(Error::InvalidSurface(format!("ellipsoid needs {n} semi-axes, got {}", axes.len())));
                }
                for a in axes {
                    positive("semi-axis", *a)?;
                }
            }
            SurfaceFamily::PerturbedSphere { radius, eps, harmonic } => {
                positive("radius", *radius)?;
                if !eps.is_finite() || *eps < 0.0 {
                    return Err(Error::InvalidSurface(format!("perturbation size must be nonnegative, got {eps}")));
                }
                let (lo, _) = harmonic.range();
                if 1.0 + eps * lo.min(0.0) <= 0.0 {
                    return Err(Error::InvalidSurface(format!("perturbation {eps} makes the radius nonpositive")));
                }
            }
        }
        let ambient_base = base.ambient();
        let ambient_frame = frame.iter().map(|e| model.push_tangent(&base.coords, &e.comps)).collect();
        let chart_axes = frame.iter().map(|e| e.comps * (1.0 / e.comps.norm())).collect();
        let mut surface = Self {
            model,
            base,
            frame,
            family,
            ambient_base,
            ambient_frame,
            chart_axes,
            scale: 0.0,
            min_radius: 0.0,
        };
        surface.check_radii()?;
        Ok(surface)
    }

    /// Surface based at the chart origin with the coordinate frame.
    pub fn centered(model: SpaceForm, family: SurfaceFamily) -> Result<Self> {
        Self::at(model, model.origin(), family)
    }

    /// Surface based at `base` with the frame of rescaled coordinate axes.
    pub fn at(model: SpaceForm, base: ChartPoint, family: SurfaceFamily) -> Result<Self> {
        let h = model.conformal_factor(&base.coords);
        let frame = (0..model.dim)
            .map(|i| base.tangent(Vector::basis(model.dim, i) * (1.0 / h)))
            .collect();
        Self::new(model, base, frame, family)
    }

    fn check_radii(&mut self) -> Result<()> {
        let n = self.model.dim;
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        let mut probe: Vec<Vector> = fibonacci_directions(n, 2000)?;
        for i in 0..n {
            probe.push(Vector::basis(n, i));
            probe.push(-Vector::basis(n, i));
        }
        for u in &probe {
            let r = self.radius(u)?;
            if !(r > 0.0) || !r.is_finite() {
                return Err(Error::InvalidSurface(format!("radius {r} at direction {:?}", u.as_slice())));
            }
            lo = lo.min(r);
            hi = hi.max(r);
        }
        if self.model.kind == ModelKind::Spherical && hi >= SPHERICAL_RADIUS_LIMIT {
            return Err(Error::InvalidSurface(format!(
                "radius {hi} leaves the open hemisphere about the base"
            )));
        }
        self.scale = hi;
        self.min_radius = lo;
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.model.dim
    }

    /// Largest sampled radius; the length scale for relative tolerances.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn min_radius(&self) -> f64 {
        self.min_radius
    }

    pub fn ambient_base(&self) -> &Vector {
        &self.ambient_base
    }

    /// Unit ambient tangent at the base for a unit direction.
    pub fn ambient_direction(&self, u: &Vector) -> Vector {
        let mut w = Vector::zeros(self.model.ambient_dim());
        for (ui, e) in u.as_slice().iter().zip(&self.ambient_frame) {
            w = w.axpy(*ui, e);
        }
        w
    }

    /// Geodesic radius `rho(u)` for a unit direction `u` in frame coordinates.
    pub fn radius(&self, u: &Vector) -> Result<f64> {
        match &self.family {
            SurfaceFamily::GeodesicSphere { radius } => Ok(*radius),
            SurfaceFamily::PerturbedSphere { radius, eps, harmonic } => Ok(radius * (1.0 + eps * harmonic.eval(u))),
            SurfaceFamily::ChartEllipsoid { axes } => self.ellipsoid_radius(axes, u),
        }
    }

    fn ellipsoid_radius(&self, axes: &[f64], u: &Vector) -> Result<f64> {
        if self.model.kind == ModelKind::Euclidean {
            let q: f64 = u.as_slice().iter().zip(axes).map(|(ui, a)| (ui / a) * (ui / a)).sum();
            return Ok(1.0 / q.sqrt());
        }
        // March along the geodesic ray until the chart ellipsoid is crossed.
        let dir = self.ambient_direction(u);
        let b = self.base.coords;
        let level = |r: f64| -> f64 {
            let x = self.model.from_ambient(&self.model.ambient_geodesic(&self.ambient_base, &dir, r));
            let d = x - b;
            self.chart_axes
                .iter()
                .zip(axes)
                .map(|(c, a)| {
                    let t = d.dot(c) / a;
                    t * t
                })
                .sum::<f64>()
                - 1.0
        };
        let h = self.model.conformal_factor(&b);
        let amin = axes.iter().copied().fold(f64::INFINITY, f64::min);
        let step = 0.02 * amin * h;
        let limit = match self.model.kind {
            ModelKind::Spherical => std::f64::consts::PI - 1e-9,
            _ => 60.0,
        };
        let mut lo = 0.0;
        loop {
            let hi = (lo + step).min(limit);
            let v = level(hi);
            if !v.is_finite() || v >= 0.0 {
                return bisect(level, lo, hi, 1e-15 * (1.0 + hi)).ok_or(Error::NoConvergence {
                    what: "ellipsoid radius",
                    iterations: 200,
                    residual: v,
                });
            }
            if hi >= limit {
                return Err(Error::InvalidSurface("chart ellipsoid leaves the model".into()));
            }
            lo = hi;
        }
    }

    /// Ambient point of `S` in direction `u`.
    pub fn ambient_point(&self, u: &Vector) -> Result<Vector> {
        let r = self.radius(u)?;
        Ok(self
            .model
            .ambient_geodesic(&self.ambient_base, &self.ambient_direction(u), r))
    }

    /// Chart coordinates of the point of `S` in direction `u`.
    pub fn point_coords(&self, u: &Vector) -> Result<Vector> {
        Ok(self.model.from_ambient(&self.ambient_point(u)?))
    }

    pub fn point(&self, u: &Vector) -> Result<ChartPoint> {
        self.model.point_from(self.point_coords(u)?)
    }

    /// Distance from the base and unit frame direction of an ambient point;
    /// `None` at the base itself.
    pub fn polar_ambient(&self, big_x: &Vector) -> (f64, Option<Vector>) {
        let d = self.model.ambient_distance(&self.ambient_base, big_x);
        if d < 1e-300 {
            return (d, None);
        }
        let w = self.model.ambient_log(&self.ambient_base, big_x, d);
        let n = self.model.dim;
        let u = Vector::from_fn(n, |i| self.model.ambient_inner(&w, &self.ambient_frame[i]));
        (d, u.normalized())
    }

    /// `rho(u) - d(base, X)`: positive inside `Omega`, zero on `S`.
    pub fn margin_ambient(&self, big_x: &Vector) -> Result<f64> {
        match self.polar_ambient(big_x) {
            (d, Some(u)) => Ok(self.radius(&u)? - d),
            (d, None) => Ok(self.min_radius - d),
        }
    }

    pub fn margin(&self, x: &Vector) -> Result<f64> {
        self.margin_ambient(&self.model.to_ambient(x))
    }

    /// Classify a chart point with the default band `1e-9 (1 + scale)`.
    pub fn contains(&self, p: &ChartPoint) -> Result<Containment> {
        self.contains_with(p, 1e-9 * (1.0 + self.scale))
    }

    pub fn contains_with(&self, p: &ChartPoint, band: f64) -> Result<Containment> {
        if p.model.kind != self.model.kind {
            return Err(Error::ModelMismatch(p.model.kind, self.model.kind));
        }
        if !self.model.in_domain(&p.coords) {
            return Err(Error::OutsideDomain {
                model: self.model.kind,
                coords: p.coords.as_slice().to_vec(),
            });
        }
        let m = self.margin(&p.coords)?;
        Ok(if m.abs() <= band {
            Containment::Boundary
        } else if m > 0.0 {
            Containment::Inside
        } else {
            Containment::Outside
        })
    }
}

fn positive(what: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidSurface(format!("{what} must be positive, got {x}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(v: &[f64]) -> Vector {
        Vector::from_slice(v).normalized().unwrap()
    }

    #[test]
    fn harmonic_names_round_trip() {
        for h in [Harmonic::Xy, Harmonic::Zonal(2), Harmonic::Zonal(5)] {
            assert_eq!(h.to_string().parse::<Harmonic>().unwrap(), h);
        }
        assert_eq!("zonal:3".parse::<Harmonic>().unwrap(), Harmonic::Zonal(3));
        assert!("zonal".parse::<Harmonic>().is_err());
        assert!("yz".parse::<Harmonic>().is_err());
    }

    #[test]
    fn sphere_radius_is_constant() {
        let s = RadialSurface::centered(SpaceForm::euclidean(3), SurfaceFamily::GeodesicSphere { radius: 1.0 }).unwrap();
        assert_eq!(s.radius(&unit(&[0.2, 0.3, -0.9])).unwrap(), 1.0);
    }

    #[test]
    fn euclidean_ellipsoid_polar_form() {
        let s = RadialSurface::centered(
            SpaceForm::euclidean(3),
            SurfaceFamily::ChartEllipsoid { axes: vec![2.0, 1.0, 1.0] },
        )
        .unwrap();
        let u = unit(&[1.0, 2.0, -0.5]);
        let expect = (u[0] * u[0] / 4.0 + u[1] * u[1] + u[2] * u[2]).powf(-0.5);
        assert!((s.radius(&u).unwrap() - expect).abs() < 1e-15);
        let x = s.point_coords(&u).unwrap();
        assert!((x[0] * x[0] / 4.0 + x[1] * x[1] + x[2] * x[2] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn curved_ellipsoid_hits_chart_ellipsoid() {
        for model in [SpaceForm::hyperbolic(3), SpaceForm::spherical(3)] {
            let s = RadialSurface::centered(model, SurfaceFamily::ChartEllipsoid { axes: vec![0.4, 0.3, 0.2] }).unwrap();
            let u = unit(&[0.3, -0.4, 0.5]);
            let x = s.point_coords(&u).unwrap() - model.origin().coords;
            let q = (x[0] / 0.4).powi(2) + (x[1] / 0.3).powi(2) + (x[2] / 0.2).powi(2);
            assert!((q - 1.0).abs() < 1e-12, "{model:?}: {q}");
        }
    }

    #[test]
    fn perturbed_sphere_stays_in_band() {
        let fam = SurfaceFamily::PerturbedSphere {
            radius: 1.0,
            eps: 0.05,
            harmonic: Harmonic::Xy,
        };
        let s = RadialSurface::centered(SpaceForm::spherical(3), fam).unwrap();
        for u in fibonacci_directions(3, 500).unwrap() {
            let r = s.radius(&u).unwrap();
            assert!((0.95..=1.05).contains(&r) && r < std::f64::consts::FRAC_PI_2);
        }
    }

    #[test]
    fn invalid_families_are_rejected() {
        let e = SpaceForm::euclidean(3);
        assert!(RadialSurface::centered(e, SurfaceFamily::GeodesicSphere { radius: -1.0 }).is_err());
        assert!(RadialSurface::centered(e, SurfaceFamily::ChartEllipsoid { axes: vec![1.0, 1.0] }).is_err());
        assert!(RadialSurface::centered(SpaceForm::spherical(3), SurfaceFamily::GeodesicSphere { radius: 1.6 }).is_err());
        assert!(RadialSurface::centered(SpaceForm::euclidean(4), SurfaceFamily::GeodesicSphere { radius: 1.0 }).is_err());
        let fam = SurfaceFamily::PerturbedSphere {
            radius: 1.0,
            eps: 3.0,
            harmonic: Harmonic::Zonal(1),
        };
        assert!(RadialSurface::centered(e, fam).is_err());
    }

    #[test]
    fn containment_examples() {
        let e = SpaceForm::euclidean(3);
        let s = RadialSurface::centered(e, SurfaceFamily::GeodesicSphere { radius: 1.0 }).unwrap();
        assert_eq!(s.contains(&e.point(&[0.5, 0.0, 0.0]).unwrap()).unwrap(), Containment::Inside);
        let on = s.point(&unit(&[0.3, 0.4, 0.5])).unwrap();
        assert_eq!(s.contains(&on).unwrap(), Containment::Boundary);
        assert_eq!(s.contains(&e.origin()).unwrap(), Containment::Inside);
        let ell = RadialSurface::centered(e, SurfaceFamily::ChartEllipsoid { axes: vec![2.0, 1.0, 1.0] }).unwrap();
        assert_eq!(ell.contains(&e.point(&[0.0, 1.5, 0.0]).unwrap()).unwrap(), Containment::Outside);

        for model in [SpaceForm::hyperbolic(3), SpaceForm::spherical(3)] {
            let s = RadialSurface::centered(model, SurfaceFamily::GeodesicSphere { radius: 0.7 }).unwrap();
            let on = s.point(&unit(&[-0.1, 0.4, 0.2])).unwrap();
            assert_eq!(s.contains(&on).unwrap(), Containment::Boundary);
            assert!((model.distance(&model.origin(), &on).unwrap() - 0.7).abs() < 1e-12);
        }
    }

    #[test]
    fn frame_directions_follow_the_base() {
        let h = SpaceForm::hyperbolic(3);
        let base = h.point(&[0.3, -0.2, 1.7]).unwrap();
        let s = RadialSurface::at(h, base, SurfaceFamily::GeodesicSphere { radius: 0.5 }).unwrap();
        let u = unit(&[0.0, 0.0, 1.0]);
        let p = s.point(&u).unwrap();
        assert!((h.distance(&base, &p).unwrap() - 0.5).abs() < 1e-12);
        let (d, dir) = s.polar_ambient(&p.ambient());
        assert!((d - 0.5).abs() < 1e-12);
        assert!(dir.unwrap().distance(&u) < 1e-10);
    }
}
