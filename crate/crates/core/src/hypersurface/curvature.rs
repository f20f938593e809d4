//! Principal curvatures under the conformal metric.
//!
//! Around each sample direction `u0` the surface is parametrized through the
//! exponential map of the direction sphere, `a -> X(exp_u0(sum a_i t_i))`,
//! with `t_i` an orthonormal basis of `u0`'s complement chosen per sample,
//! so no sample sits near a coordinate pole. First and second derivatives
//! of the chart image come from sixth-order central differences. With the chart first and second
//! fundamental forms `E`, `L` and the inward Euclidean normal `nu`, the
//! Euclidean principal curvatures solve `L x = k E x`, and the metric ones
//! are `(k - d_nu log h) / h`.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::grid::{direction_chart, tangent_basis};
use super::RadialSurface;
use crate::error::{Error, Result};
use crate::linalg::{orthogonal_complement, Vector};
use crate::optimize::{D1_WEIGHTS, D2_CENTER, D2_WEIGHTS, STENCIL_OFFSETS};
use crate::spaceform::ChartPoint;

/// Stencil step on direction parameters (radians).
pub const FD_STEP: f64 = 4e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceSample {
    /// Unit direction at the base, frame coordinates.
    pub direction: Vector,
    pub point: ChartPoint,
    /// Euclidean-unit inward chart normal.
    pub chart_normal: Vector,
    /// Metric-unit inward normal, chart components: `chart_normal / h`.
    pub normal: Vector,
    /// Principal curvatures for the inward normal, ascending.
    pub curvatures: Vec<f64>,
    /// Metric area element relative to the round measure on directions.
    pub area_density: f64,
}

struct LocalJet {
    point: Vector,
    first: Vec<Vector>,
    second: Option<Vec<Vec<Vector>>>,
}

impl RadialSurface {
    fn local_map(&self, u0: &Vector, basis: &[Vector], a: &[f64]) -> Result<Vector> {
        self.point_coords(&direction_chart(u0, basis, a))
    }

    fn jet(&self, u0: &Vector, step: f64, with_second: bool) -> Result<LocalJet> {
        let basis = tangent_basis(u0);
        let m = basis.len();
        let point = self.point_coords(u0)?;
        let mut first = Vec::with_capacity(m);
        let mut second = vec![vec![Vector::zeros(self.dim()); m]; m];
        let mut coords = vec![0.0; m];
        for i in 0..m {
            let mut stencil = [Vector::zeros(self.dim()); 6];
            for (k, off) in STENCIL_OFFSETS.iter().enumerate() {
                coords.iter_mut().for_each(|c| *c = 0.0);
                coords[i] = off * step;
                stencil[k] = self.local_map(u0, &basis, &coords)?;
            }
            let mut d1 = Vector::zeros(self.dim());
            for (w, f) in D1_WEIGHTS.iter().zip(&stencil) {
                d1 = d1.axpy(*w / step, f);
            }
            first.push(d1);
            if with_second {
                let mut d2 = point * (D2_CENTER / (step * step));
                for (w, f) in D2_WEIGHTS.iter().zip(&stencil) {
                    d2 = d2.axpy(*w / (step * step), f);
                }
                second[i][i] = d2;
            }
        }
        if with_second {
            for i in 0..m {
                for j in i + 1..m {
                    let mut mixed = Vector::zeros(self.dim());
                    for (wa, oa) in D1_WEIGHTS.iter().zip(&STENCIL_OFFSETS) {
                        for (wb, ob) in D1_WEIGHTS.iter().zip(&STENCIL_OFFSETS) {
                            coords.iter_mut().for_each(|c| *c = 0.0);
                            coords[i] = oa * step;
                            coords[j] = ob * step;
                            let f = self.local_map(u0, &basis, &coords)?;
                            mixed = mixed.axpy(wa * wb / (step * step), &f);
                        }
                    }
                    second[i][j] = mixed;
                    second[j][i] = mixed;
                }
            }
        }
        Ok(LocalJet {
            point,
            first,
            second: with_second.then_some(second),
        })
    }

    fn inward_normal(&self, u0: &Vector, jet: &LocalJet) -> Result<Vector> {
        let nu = orthogonal_complement(&jet.first, 1e-12)
            .ok_or_else(|| Error::DegenerateParametrization(u0.as_slice().to_vec()))?;
        let towards_base = self.model.log_raw(&jet.point, &self.base.coords);
        Ok(if nu.dot(&towards_base) < 0.0 { -nu } else { nu })
    }

    fn gram(jet: &LocalJet) -> DMatrix<f64> {
        let m = jet.first.len();
        DMatrix::from_fn(m, m, |i, j| jet.first[i].dot(&jet.first[j]))
    }

    /// Principal curvatures, normals and area density at direction `u`.
    pub fn principal_curvatures(&self, u: &Vector) -> Result<SurfaceSample> {
        self.principal_curvatures_with_step(u, FD_STEP)
    }

    pub fn principal_curvatures_with_step(&self, u: &Vector, step: f64) -> Result<SurfaceSample> {
        let u0 = u.normalized().ok_or(Error::ZeroVector)?;
        let jet = self.jet(&u0, step, true)?;
        let nu = self.inward_normal(&u0, &jet)?;
        let e = Self::gram(&jet);
        let det = e.determinant();
        if !(det > 1e-24) {
            return Err(Error::DegenerateParametrization(u0.as_slice().to_vec()));
        }
        let second = jet.second.as_ref().expect("requested");
        let m = jet.first.len();
        let l = DMatrix::from_fn(m, m, |i, j| second[i][j].dot(&nu));
        let chol = e
            .clone()
            .cholesky()
            .ok_or_else(|| Error::DegenerateParametrization(u0.as_slice().to_vec()))?;
        let c_inv = chol
            .l()
            .try_inverse()
            .ok_or_else(|| Error::DegenerateParametrization(u0.as_slice().to_vec()))?;
        let mut shape = &c_inv * l * c_inv.transpose();
        shape = (&shape + shape.transpose()) * 0.5;
        let eig = SymmetricEigen::new(shape);

        let x = jet.point;
        let h = self.model.conformal_factor(&x);
        let dnu_log_h = self.model.grad_log_factor(&x).dot(&nu);
        let mut curvatures: Vec<f64> = eig.eigenvalues.iter().map(|k| (k - dnu_log_h) / h).collect();
        curvatures.sort_by(f64::total_cmp);
        Ok(SurfaceSample {
            direction: u0,
            point: ChartPoint { model: self.model, coords: x },
            chart_normal: nu,
            normal: nu * (1.0 / h),
            curvatures,
            area_density: h.powi(m as i32) * det.sqrt(),
        })
    }

    /// Chart point and Euclidean-unit inward chart normal at direction `u`,
    /// from first derivatives only.
    pub fn point_and_normal(&self, u: &Vector) -> Result<(Vector, Vector)> {
        let u0 = u.normalized().ok_or(Error::ZeroVector)?;
        let jet = self.jet(&u0, FD_STEP, false)?;
        let nu = self.inward_normal(&u0, &jet)?;
        Ok((jet.point, nu))
    }

    /// Metric area element relative to the round measure at direction `u`.
    pub fn area_density(&self, u: &Vector) -> Result<f64> {
        let u0 = u.normalized().ok_or(Error::ZeroVector)?;
        let jet = self.jet(&u0, FD_STEP, false)?;
        let m = jet.first.len();
        let det = Self::gram(&jet).determinant().max(0.0);
        Ok(self.model.conformal_factor(&jet.point).powi(m as i32) * det.sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypersurface::{fibonacci_directions, SurfaceFamily};
    use crate::SpaceForm;

    fn sphere(model: SpaceForm, r: f64) -> RadialSurface {
        RadialSurface::centered(model, SurfaceFamily::GeodesicSphere { radius: r }).unwrap()
    }

    #[test]
    fn euclidean_sphere_radius_two() {
        let s = sphere(SpaceForm::euclidean(3), 2.0);
        for u in fibonacci_directions(3, 40).unwrap() {
            let sample = s.principal_curvatures(&u).unwrap();
            for k in &sample.curvatures {
                assert!((k - 0.5).abs() < 1e-9, "{k}");
            }
            assert!((sample.area_density - 4.0).abs() < 1e-9);
        }
    }

    #[test]
    fn curved_geodesic_spheres() {
        let cases = [
            (SpaceForm::hyperbolic(3), 1.0, 1.0f64.cosh() / 1.0f64.sinh()),
            (SpaceForm::spherical(3), 0.5, 0.5f64.cos() / 0.5f64.sin()),
            (SpaceForm::hyperbolic(2), 1.0, 1.0f64.cosh() / 1.0f64.sinh()),
            (SpaceForm::spherical(2), 0.5, 0.5f64.cos() / 0.5f64.sin()),
        ];
        for (model, r, expect) in cases {
            let s = sphere(model, r);
            for u in fibonacci_directions(model.dim, 30).unwrap() {
                let sample = s.principal_curvatures(&u).unwrap();
                for k in &sample.curvatures {
                    assert!((k - expect).abs() < 1e-8, "{model:?}: {k} vs {expect}");
                }
                let hn = model.conformal_factor(&sample.point.coords) * sample.normal.norm();
                assert!((hn - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ellipsoid_equator_and_pole() {
        let s = RadialSurface::centered(
            SpaceForm::euclidean(3),
            SurfaceFamily::ChartEllipsoid { axes: vec![2.0, 1.0, 1.0] },
        )
        .unwrap();
        let eq = s.principal_curvatures(&Vector::from_slice(&[0.0, 1.0, 0.0])).unwrap();
        assert!((eq.curvatures[0] - 0.25).abs() < 1e-8);
        assert!((eq.curvatures[1] - 1.0).abs() < 1e-8);
        let pole = s.principal_curvatures(&Vector::from_slice(&[1.0, 0.0, 0.0])).unwrap();
        for k in &pole.curvatures {
            assert!((k - 2.0).abs() < 1e-7);
        }
    }

    #[test]
    fn inward_normal_points_to_base() {
        let s = sphere(SpaceForm::hyperbolic(3), 0.8);
        let u = Vector::from_slice(&[0.0, 0.6, 0.8]);
        let sample = s.principal_curvatures(&u).unwrap();
        let to_base = s.base.coords - sample.point.coords;
        assert!(sample.chart_normal.dot(&to_base) > 0.0);
    }
}
