//! Totally geodesic hypersurfaces.
//!
//! A hyperplane is stored by its unit ambient normal `A` (and an offset in
//! the Euclidean case): `{X : <A, X> = offset}`. Reflections are then the
//! linear maps `X -> X - 2(<A, X> - offset) A`, which stay well conditioned
//! even when the chart picture is a sphere of huge radius. The chart shape
//! (affine plane or inversion sphere) is derived on demand.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Vector;

use super::{ChartPoint, ModelKind, SpaceForm, TangentVector};

/// Coefficients this close to zero make the chart shape an affine plane.
const AFFINE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodesicHyperplane {
    pub model: SpaceForm,
    /// Unit ambient normal (Euclidean: the chart normal).
    pub normal: Vector,
    /// Euclidean offset; zero for the curved models.
    pub offset: f64,
}

/// Chart picture of a hyperplane.
///
/// `orientation` is `+1` when the positive side (`signed_value > 0`) is the
/// half-space `u.x > c` (affine) or the interior of the chart ball (sphere),
/// and `-1` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum HyperplaneShape {
    Affine {
        normal: Vector,
        offset: f64,
        orientation: i8,
    },
    Sphere {
        center: Vector,
        radius: f64,
        orientation: i8,
    },
}

impl GeodesicHyperplane {
    /// Hyperplane with the given ambient normal (normalized here).
    pub fn from_ambient_normal(model: SpaceForm, normal: Vector, offset: f64) -> Result<Self> {
        if normal.len() != model.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: model.ambient_dim(),
                found: normal.len(),
            });
        }
        let q = model.ambient_inner(&normal, &normal);
        if !(q > 0.0) || !q.is_finite() {
            return Err(Error::InvalidArgument(
                "hyperplane normal must be a nonzero spacelike vector".into(),
            ));
        }
        let s = 1.0 / q.sqrt();
        let offset = if model.kind == ModelKind::Euclidean { offset * s } else { 0.0 };
        Ok(Self {
            model,
            normal: normal * s,
            offset,
        })
    }

    /// Hyperplane through `p` orthogonal to the tangent vector `n`.
    pub fn through_point(p: &ChartPoint, n: &TangentVector) -> Result<Self> {
        let model = p.model;
        let w = model.push_tangent(&p.coords, &n.comps);
        let offset = if model.kind == ModelKind::Euclidean { w.dot(&p.coords) } else { 0.0 };
        Self::from_ambient_normal(model, w, offset)
    }

    /// `<A, X> - offset` for an ambient point `X`: positive on the side the
    /// normal points to, and `sn(distance)` in the curved models.
    #[inline]
    pub fn signed_value(&self, big_x: &Vector) -> f64 {
        self.model.ambient_inner(&self.normal, big_x) - self.offset
    }

    pub fn side_of(&self, p: &ChartPoint) -> f64 {
        self.signed_value(&p.ambient())
    }

    /// Reflection of an ambient point.
    #[inline]
    pub fn reflect_ambient(&self, big_x: &Vector) -> Vector {
        big_x.axpy(-2.0 * self.signed_value(big_x), &self.normal)
    }

    /// Linear part of the reflection, acting on ambient tangent vectors.
    #[inline]
    pub fn reflect_ambient_vector(&self, w: &Vector) -> Vector {
        w.axpy(-2.0 * self.model.ambient_inner(&self.normal, w), &self.normal)
    }

    pub fn reflect_coords(&self, x: &Vector) -> Result<Vector> {
        let y = self.model.from_ambient(&self.reflect_ambient(&self.model.to_ambient(x)));
        if !y.is_finite() || y.max_abs() > 1e150 {
            return Err(Error::InversionSingularity);
        }
        Ok(y)
    }

    pub fn reflect_point(&self, p: &ChartPoint) -> Result<ChartPoint> {
        let y = self.reflect_coords(&p.coords)?;
        p.model.point_from(y)
    }

    pub fn reflect_tangent(&self, v: &TangentVector) -> Result<TangentVector> {
        let model = self.model;
        let x = v.base.coords;
        let base = self.reflect_point(&v.base)?;
        let w = self.reflect_ambient_vector(&model.push_tangent(&x, &v.comps));
        Ok(TangentVector {
            base,
            comps: model.pull_tangent(&base.coords, &w),
        })
    }

    /// Geodesic distance from `p` to the hyperplane.
    pub fn distance_to(&self, p: &ChartPoint) -> f64 {
        self.distance_to_ambient(&p.ambient())
    }

    pub fn distance_to_ambient(&self, big_x: &Vector) -> f64 {
        let s = self.signed_value(big_x).abs();
        match self.model.kind {
            ModelKind::Euclidean => s,
            ModelKind::Spherical => s.min(1.0).asin(),
            ModelKind::Hyperbolic => s.asinh(),
        }
    }

    /// Euclidean-unit chart normal at a chart point of the hyperplane,
    /// pointing to the positive side.
    pub fn chart_normal_at(&self, x: &Vector) -> Vector {
        let big_x = self.model.to_ambient(x);
        let a = self.model.tangent_projection(&big_x, &self.normal);
        self.model.pull_tangent(x, &a).normalized().unwrap_or(Vector::zeros(self.model.dim))
    }

    /// Chart picture of the hyperplane.
    pub fn shape(&self) -> HyperplaneShape {
        let n = self.model.dim;
        let a = self.normal;
        match self.model.kind {
            ModelKind::Euclidean => HyperplaneShape::Affine {
                normal: a,
                offset: self.offset,
                orientation: 1,
            },
            ModelKind::Spherical => {
                // <A, X> (1 + |x|^2) / 2 = a.x + a_n (1 - |x|^2) / 2
                let a_chart = a.truncated(n);
                let an = a[n];
                if an.abs() <= AFFINE_EPS * a_chart.norm().max(1e-300) {
                    HyperplaneShape::Affine {
                        normal: a_chart.normalized().unwrap_or(a_chart),
                        offset: 0.0,
                        orientation: 1,
                    }
                } else {
                    let center = a_chart * (1.0 / an);
                    HyperplaneShape::Sphere {
                        center,
                        radius: (1.0 + center.norm_squared()).sqrt(),
                        orientation: if an > 0.0 { 1 } else { -1 },
                    }
                }
            }
            ModelKind::Hyperbolic => {
                // 2t <A, X>_L = 2 a_y.y + k |x|^2 - (a_{n-1} + a_n), k = a_{n-1} - a_n
                let mut a_y = a.truncated(n);
                a_y[n - 1] = 0.0;
                let k = a[n - 1] - a[n];
                let m = a[n - 1] + a[n];
                if k.abs() <= AFFINE_EPS * a_y.norm().max(1e-300) {
                    let len = a_y.norm();
                    HyperplaneShape::Affine {
                        normal: a_y * (1.0 / len),
                        offset: m / (2.0 * len),
                        orientation: 1,
                    }
                } else {
                    let center = a_y * (-1.0 / k);
                    HyperplaneShape::Sphere {
                        center,
                        radius: (center.norm_squared() + m / k).sqrt(),
                        orientation: if k < 0.0 { 1 } else { -1 },
                    }
                }
            }
        }
    }
}

impl SpaceForm {
    /// `pi_{v,s}`: the hyperplane through `gamma_v(s)` orthogonal to
    /// `gamma_v'(s)`, where `gamma_v` is the geodesic leaving the chart origin
    /// with velocity `v` (normalized here). The normal points towards
    /// increasing `s`.
    pub fn make_hyperplane(&self, v: &TangentVector, s: f64) -> Result<GeodesicHyperplane> {
        let o = self.origin();
        if v.base.model.kind != self.kind || (v.base.coords - o.coords).max_abs() > 1e-12 {
            return Err(Error::BaseMismatch);
        }
        let limit = match self.kind {
            ModelKind::Spherical => std::f64::consts::FRAC_PI_2,
            _ => f64::INFINITY,
        };
        if !s.is_finite() || s.abs() >= limit {
            return Err(Error::ParameterOutOfRange(s));
        }
        let dir = self.ambient_direction(&v.unit()?.comps);
        Ok(self.leaf_hyperplane(&dir, s))
    }

    /// Unit ambient tangent at the origin for a chart direction (any length).
    pub fn ambient_direction(&self, chart_dir: &Vector) -> Vector {
        let w = self.push_tangent(&self.origin().coords, chart_dir);
        let len = self.ambient_inner(&w, &w).sqrt();
        w * (1.0 / len)
    }

    /// `pi_{v,s}` for a unit ambient direction `dir` at the origin.
    pub fn leaf_hyperplane(&self, dir: &Vector, s: f64) -> GeodesicHyperplane {
        let o = self.ambient_origin();
        let normal = self.ambient_geodesic_velocity(&o, dir, s);
        let offset = if self.kind == ModelKind::Euclidean { s } else { 0.0 };
        GeodesicHyperplane {
            model: *self,
            normal,
            offset,
        }
    }

    /// Leaf coordinate of an ambient point: the `s` with `X` on `pi_{v,s}`.
    #[inline]
    pub fn leaf_coordinate_ambient(&self, dir: &Vector, big_x: &Vector) -> f64 {
        let along = self.ambient_inner(dir, big_x);
        match self.kind {
            ModelKind::Euclidean => along,
            ModelKind::Spherical => along.atan2(big_x[self.dim]),
            ModelKind::Hyperbolic => (along / big_x[self.dim]).atanh(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dir(model: &SpaceForm, comps: &[f64]) -> TangentVector {
        model.origin().tangent(Vector::from_slice(comps))
    }

    #[test]
    fn euclidean_plane_and_reflection() {
        let e = SpaceForm::euclidean(3);
        let pi = e.make_hyperplane(&dir(&e, &[1.0, 0.0, 0.0]), 2.0).unwrap();
        assert_eq!(
            pi.shape(),
            HyperplaneShape::Affine {
                normal: Vector::basis(3, 0),
                offset: 2.0,
                orientation: 1
            }
        );
        let p = e.point(&[3.0, 0.0, 0.0]).unwrap();
        assert_eq!(pi.reflect_point(&p).unwrap().coords.as_slice(), &[1.0, 0.0, 0.0]);
        let on = e.point(&[2.0, 5.0, -1.0]).unwrap();
        assert_eq!(pi.reflect_point(&on).unwrap(), on);
    }

    #[test]
    fn spherical_plane_through_origin_is_affine() {
        let s = SpaceForm::spherical(3);
        let pi = s.make_hyperplane(&dir(&s, &[0.5, 0.0, 0.0]), 0.0).unwrap();
        match pi.shape() {
            HyperplaneShape::Affine { normal, offset, .. } => {
                assert!((normal - Vector::basis(3, 0)).max_abs() < 1e-15);
                assert_eq!(offset, 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(s.make_hyperplane(&dir(&s, &[1.0, 0.0, 0.0]), 1.6).is_err());
    }

    #[test]
    fn spherical_shapes_are_great_spheres() {
        let s = SpaceForm::spherical(3);
        let pi = s.make_hyperplane(&dir(&s, &[0.0, 1.0, 1.0]), 0.4).unwrap();
        let HyperplaneShape::Sphere { center, radius, .. } = pi.shape() else {
            panic!("expected sphere shape");
        };
        assert!((radius * radius - 1.0 - center.norm_squared()).abs() < 1e-12);
        // gamma(0.4) lies on the chart sphere
        let v = dir(&s, &[0.0, 1.0, 1.0]).unit().unwrap();
        let g = s.geodesic(&s.origin(), &v, 0.4).unwrap();
        assert!(((g.coords - center).norm() - radius).abs() < 1e-12);
    }

    #[test]
    fn hyperbolic_shape_is_boundary_centered_hemisphere() {
        let h = SpaceForm::hyperbolic(3);
        let s = 0.7;
        let pi = h.make_hyperplane(&dir(&h, &[1.0, 0.0, 0.0]), s).unwrap();
        let HyperplaneShape::Sphere { center, radius, orientation } = pi.shape() else {
            panic!("expected sphere shape");
        };
        assert_eq!(center[2], 0.0);
        assert!((center[0] - 1.0 / s.tanh()).abs() < 1e-12);
        assert!((radius - 1.0 / s.sinh()).abs() < 1e-12);
        // The origin side (s < 0.7) is outside the ball, so the positive side is inside.
        assert_eq!(orientation, 1);
        let p = h.point(&[0.4, 0.3, 0.9]).unwrap();
        let direct = center + (p.coords - center) * (radius * radius / (p.coords - center).norm_squared());
        assert!((pi.reflect_point(&p).unwrap().coords - direct).max_abs() < 1e-12);
    }

    #[test]
    fn hyperbolic_vertical_plane() {
        let h = SpaceForm::hyperbolic(3);
        let pi = h.make_hyperplane(&dir(&h, &[0.0, 1.0, 0.0]), 0.0).unwrap();
        match pi.shape() {
            HyperplaneShape::Affine { normal, offset, .. } => {
                assert!((normal - Vector::basis(3, 1)).max_abs() < 1e-15);
                assert!(offset.abs() < 1e-15);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn reflection_of_tangent_preserves_norm() {
        for m in [SpaceForm::euclidean(3), SpaceForm::spherical(3), SpaceForm::hyperbolic(3)] {
            let pi = m.make_hyperplane(&dir(&m, &[0.3, -0.4, 0.5]), 0.2).unwrap();
            let p = m.point(&[0.2, 0.1, 0.8]).unwrap();
            let v = p.tangent(Vector::from_slice(&[1.0, -2.0, 0.5]));
            let r = pi.reflect_tangent(&v).unwrap();
            assert!((r.norm() - v.norm()).abs() < 1e-12 * v.norm());
            let back = pi.reflect_tangent(&r).unwrap();
            assert!((back.comps - v.comps).max_abs() < 1e-12);
        }
    }

    #[test]
    fn leaf_coordinate_of_axis_points() {
        for m in [SpaceForm::euclidean(3), SpaceForm::spherical(3), SpaceForm::hyperbolic(3)] {
            let v = dir(&m, &[0.0, 0.6, 0.8]).unit().unwrap();
            let a = m.ambient_direction(&v.comps);
            for s in [-1.2, -0.1, 0.0, 0.5, 1.3] {
                let g = m.geodesic(&m.origin(), &v, s).unwrap();
                let sigma = m.leaf_coordinate_ambient(&a, &g.ambient());
                assert!((sigma - s).abs() < 1e-12, "{:?} {s} {sigma}", m.kind);
                let pi = m.leaf_hyperplane(&a, s);
                assert!(pi.signed_value(&g.ambient()).abs() < 1e-12);
            }
        }
    }
}
