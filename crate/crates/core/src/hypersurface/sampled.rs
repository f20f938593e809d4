//! Surfaces evaluated on a direction grid: curvature fields, oscillation,
//! area, touching-ball radius and volume quadrature.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{DirectionGrid, GridSpec};
use super::{CurvatureOperator, RadialSurface, SurfaceSample};
use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::optimize::{bisect, gauss_legendre};
use crate::spaceform::ModelKind;

#[derive(Debug, Clone)]
pub struct SampledSurface {
    pub grid: DirectionGrid,
    pub samples: Vec<SurfaceSample>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureSummary {
    pub operator: CurvatureOperator,
    pub min: f64,
    pub max: f64,
    pub osc: f64,
    pub argmin: Vector,
    pub argmax: Vector,
    pub area: f64,
    pub touching_radius: f64,
    pub sample_count: usize,
    pub grid: GridSpec,
}

/// Nodes and weights of a quadrature rule over `Omega`, in the ambient model.
#[derive(Debug, Clone)]
pub struct VolumeQuadrature {
    pub points: Vec<Vector>,
    pub weights: Vec<f64>,
}

impl VolumeQuadrature {
    pub fn volume(&self) -> f64 {
        self.weights.iter().sum()
    }
}

impl RadialSurface {
    /// Curvature samples at every grid direction, in grid order.
    pub fn sample(&self, grid: &DirectionGrid) -> Result<SampledSurface> {
        if grid.is_empty() {
            return Err(Error::EmptyGrid);
        }
        if grid.spec.dim != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: grid.spec.dim,
            });
        }
        let samples = grid
            .directions
            .par_iter()
            .map(|u| self.principal_curvatures(u))
            .collect::<Result<Vec<_>>>()?;
        Ok(SampledSurface {
            grid: grid.clone(),
            samples,
        })
    }

    /// Metric area `|S|_g` by the grid's product quadrature.
    pub fn area(&self, grid: &DirectionGrid) -> Result<f64> {
        if grid.quadrature.is_empty() {
            return Err(Error::EmptyGrid);
        }
        let dens = grid
            .quadrature
            .par_iter()
            .map(|(u, w)| self.area_density(u).map(|j| j * w))
            .collect::<Result<Vec<_>>>()?;
        Ok(dens.iter().sum())
    }

    /// Tensor quadrature over `Omega` in geodesic polar coordinates about the
    /// base: Gauss–Legendre in the radial fraction times the grid's angular
    /// rule, with volume element `sn(r)^{n-1} dr du`.
    pub fn volume_quadrature(&self, grid: &DirectionGrid, radial_nodes: usize) -> Result<VolumeQuadrature> {
        if grid.quadrature.is_empty() || radial_nodes == 0 {
            return Err(Error::EmptyGrid);
        }
        let (nodes, weights) = gauss_legendre(radial_nodes);
        let n = self.dim();
        let per_direction = grid
            .quadrature
            .par_iter()
            .map(|(u, w)| {
                let rho = self.radius(u)?;
                let dir = self.ambient_direction(u);
                let out: Vec<(Vector, f64)> = nodes
                    .iter()
                    .zip(&weights)
                    .map(|(t, wt)| {
                        let frac = 0.5 * (t + 1.0);
                        let r = frac * rho;
                        let x = self.model.ambient_geodesic(self.ambient_base(), &dir, r);
                        (x, w * 0.5 * wt * rho * self.model.sn(r).powi(n as i32 - 1))
                    })
                    .collect();
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut points = Vec::with_capacity(per_direction.len() * radial_nodes);
        let mut wts = Vec::with_capacity(points.capacity());
        for block in per_direction {
            for (x, w) in block {
                points.push(x);
                wts.push(w);
            }
        }
        Ok(VolumeQuadrature { points, weights: wts })
    }

    /// Length of the chord of `Omega` along the geodesic leaving the surface
    /// point `p` (ambient) in the inward unit ambient direction `dir`.
    pub fn inward_chord(&self, p: &Vector, dir: &Vector) -> Result<f64> {
        let scale = self.scale();
        let step = scale / 64.0;
        let limit = match self.model.kind {
            ModelKind::Spherical => std::f64::consts::PI - 1e-6,
            _ => 8.0 * scale + 10.0,
        };
        let at = |t: f64| self.margin_ambient(&self.model.ambient_geodesic(p, dir, t));
        // Leave the surface first, then look for the next sign change.
        let mut lo = step;
        let mut m_lo = at(lo)?;
        if m_lo <= 0.0 {
            let mut t = lo;
            while m_lo <= 0.0 && t > 1e-9 * scale {
                t *= 0.25;
                m_lo = at(t)?;
            }
            lo = t;
        }
        loop {
            let hi = lo + step;
            if hi > limit {
                return Err(Error::NoIntersection);
            }
            let m_hi = at(hi)?;
            if m_hi <= 0.0 {
                let root = bisect(|t| at(t).unwrap_or(f64::NAN), lo, hi, 1e-12 * (1.0 + hi));
                return root.ok_or(Error::NoIntersection);
            }
            lo = hi;
        }
    }
}

impl SampledSurface {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn values(&self, op: &CurvatureOperator) -> Result<Vec<f64>> {
        self.samples.iter().map(|s| op.value(&s.curvatures)).collect()
    }

    /// Largest `|k_i|` over all samples.
    pub fn max_abs_curvature(&self) -> f64 {
        self.samples
            .iter()
            .flat_map(|s| s.curvatures.iter())
            .fold(0.0f64, |m, k| m.max(k.abs()))
    }

    /// `min(1 / max|k|, half the shortest inward normal chord)`.
    pub fn touching_ball_radius(&self, surface: &RadialSurface) -> Result<f64> {
        if self.samples.is_empty() {
            return Err(Error::EmptyGrid);
        }
        let model = surface.model;
        let chords = self
            .samples
            .par_iter()
            .map(|s| {
                let p = s.point.ambient();
                let w = model.push_tangent(&s.point.coords, &s.normal);
                surface.inward_chord(&p, &w)
            })
            .collect::<Result<Vec<_>>>()?;
        let half_chord = chords.iter().fold(f64::INFINITY, |m, c| m.min(0.5 * c));
        let kmax = self.max_abs_curvature();
        let rho = if kmax > 0.0 { half_chord.min(1.0 / kmax) } else { half_chord };
        if rho > 0.0 && rho.is_finite() {
            Ok(rho)
        } else {
            Err(Error::SelfIntersection(rho))
        }
    }

    /// Extremes of `H_S` over the samples plus area and touching radius.
    pub fn summary(&self, surface: &RadialSurface, op: &CurvatureOperator) -> Result<CurvatureSummary> {
        let values = self.values(op)?;
        let (imin, imax) = extreme_indices(&values).ok_or(Error::EmptyGrid)?;
        Ok(CurvatureSummary {
            operator: op.clone(),
            min: values[imin],
            max: values[imax],
            osc: values[imax] - values[imin],
            argmin: self.samples[imin].direction,
            argmax: self.samples[imax].direction,
            area: surface.area(&self.grid)?,
            touching_radius: self.touching_ball_radius(surface)?,
            sample_count: values.len(),
            grid: self.grid.spec,
        })
    }

    /// `max - min` of `H_S` over the samples.
    pub fn osc(&self, op: &CurvatureOperator) -> Result<f64> {
        let values = self.values(op)?;
        let (imin, imax) = extreme_indices(&values).ok_or(Error::EmptyGrid)?;
        Ok(values[imax] - values[imin])
    }
}

fn extreme_indices(values: &[f64]) -> Option<(usize, usize)> {
    if values.is_empty() {
        return None;
    }
    let mut imin = 0;
    let mut imax = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[imin] {
            imin = i;
        }
        if *v > values[imax] {
            imax = i;
        }
    }
    Some((imin, imax))
}
