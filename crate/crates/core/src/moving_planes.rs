//! The moving-plane procedure.
//!
//! For a direction `v` at the chart origin the hyperplanes `pi_{v,s}` foliate
//! the model. Sliding `s` down from the top of the surface, the cap
//! `S_{v,s} = {sigma_v > s}` is reflected through `pi_{v,s}` until the
//! reflection stops fitting inside `Omega`; that level is the critical
//! position `m_v`. Everything runs on a fixed direction grid of surface
//! samples held in the ambient linear model, where reflections are linear.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypersurface::{direction_chart, tangent_basis, DirectionGrid, RadialSurface, SampledSurface};
use crate::linalg::Vector;
use crate::optimize::{bisect, bisect_predicate, nelder_mead, NelderMeadOptions};
use crate::spaceform::{ChartPoint, GeodesicHyperplane, ModelKind, SpaceForm};
use crate::tolerance::Tolerances;

/// Number of levels above `m_v` at which the predicate is re-checked.
pub const MONOTONICITY_PROBES: usize = 20;

/// Widening of the initial bisection bracket beyond the sampled leaf range.
const BRACKET_PAD: f64 = 1e-6;

/// Margins within this of the minimum count as ties for the tangency point.
const TANGENCY_TIE: f64 = 1e-10;

/// Relative margin floor of the bisection predicate: roundoff level, so the
/// critical plane stops where the reflected cap first leaves `Omega` rather
/// than where it has left by the containment tolerance.
pub const MARGIN_FLOOR_REL: f64 = 1e-12;

/// Arclength resolution of inner projections.
const PROJECTION_TOL: f64 = 1e-10;

/// Leaf coordinate `sigma_v(p)`: the `t` with `p` on `pi_{v,t}`, i.e. the
/// parameter of the metric projection of `p` onto the geodesic `gamma_v`
/// leaving the chart origin with velocity `v`.
///
/// Euclidean: `p . v`. Sphere: `atan2(<V, X>, X_n)`. Hyperbolic:
/// `atanh(<V, X> / X_n)`. The spherical projection is undefined at the two
/// poles of the great circle `gamma_v`.
pub fn leaf_coordinate(model: &SpaceForm, v: &Vector, p: &ChartPoint) -> Result<f64> {
    if p.model.kind != model.kind {
        return Err(Error::ModelMismatch(p.model.kind, model.kind));
    }
    let v = v.normalized().ok_or(Error::ZeroVector)?;
    let dir = model.ambient_direction(&v);
    let big_x = p.ambient();
    if model.kind == ModelKind::Spherical {
        let along = model.ambient_inner(&dir, &big_x);
        if along.hypot(big_x[model.dim]) < 1e-12 {
            return Err(Error::NonUniqueProjection);
        }
    }
    Ok(model.leaf_coordinate_ambient(&dir, &big_x))
}

/// How `S` and the reflected cap touch at the critical position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TangencyKind {
    /// Tangency at a point off the critical hyperplane.
    Interior,
    /// Tangency on the hyperplane, where `S` meets it orthogonally.
    Boundary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPosition {
    /// Unit chart direction at the origin.
    pub direction: Vector,
    pub m: f64,
    /// Final bisection bracket: the predicate fails at `lo` and holds at `hi`.
    pub bracket: (f64, f64),
    /// Whether the predicate held at every probe level above `m`.
    pub monotone: bool,
    pub warnings: Vec<String>,
}

/// Inner projection of a point of the reflected cap onto `S`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionMatch {
    pub p: ChartPoint,
    pub p_hat: ChartPoint,
    /// `d(p, p_hat)`.
    pub distance: f64,
    /// `|N_p - tau_{p_hat}^p N_{p_hat}|_p`.
    pub normal_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MovingPlanesResult {
    pub direction: Vector,
    pub m: f64,
    pub plane: GeodesicHyperplane,
    pub tangency_point: ChartPoint,
    pub tangency_kind: TangencyKind,
    /// Grid indices of the samples in the cap `S_{v,m}`.
    pub cap_indices: Vec<usize>,
    /// Chart points of the cap samples.
    pub cap: Vec<Vector>,
    /// Chart points of their reflections, in the same order.
    pub reflected_cap: Vec<Vector>,
    /// Grid indices of the connected component of the cap whose reflection
    /// contains the tangency point.
    pub component: Vec<usize>,
    /// Inner projections of the reflected component onto `S`.
    pub matches: Vec<ProjectionMatch>,
    /// `max_p d(p, Sigma u Sigma^pi)` over the surface samples.
    pub defect: f64,
    pub monotone: bool,
    pub warnings: Vec<String>,
}

/// Compact per-direction record for JSON export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionRecord {
    pub v: Vec<f64>,
    pub m_v: f64,
    pub tangency_kind: TangencyKind,
    pub defect: f64,
    pub warnings: Vec<String>,
}

impl MovingPlanesResult {
    pub fn record(&self) -> DirectionRecord {
        DirectionRecord {
            v: self.direction.as_slice().to_vec(),
            m_v: self.m,
            tangency_kind: self.tangency_kind,
            defect: self.defect,
            warnings: self.warnings.clone(),
        }
    }

    /// Largest `d(p, p_hat) + |N_p - tau N_p_hat|` over the matches.
    pub fn max_match_sum(&self) -> f64 {
        self.matches
            .iter()
            .map(|m| m.distance + m.normal_gap)
            .fold(0.0, f64::max)
    }
}

/// Moving-plane analysis of one surface on one direction grid.
pub struct MovingPlanes<'a> {
    surface: &'a RadialSurface,
    grid: &'a DirectionGrid,
    /// Ambient sample points, grid order.
    points: Vec<Vector>,
    /// Metric-unit inward normals as ambient tangent vectors.
    normals: Vec<Vector>,
    tol_c: f64,
    tol_s: f64,
    floor: f64,
}

impl<'a> MovingPlanes<'a> {
    pub fn new(surface: &'a RadialSurface, grid: &'a DirectionGrid, tol: &Tolerances) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::EmptyGrid);
        }
        if grid.spec.dim != surface.dim() {
            return Err(Error::DimensionMismatch {
                expected: surface.dim(),
                found: grid.spec.dim,
            });
        }
        let model = surface.model;
        let pairs = grid
            .directions
            .par_iter()
            .map(|u| {
                let (x, nu) = surface.point_and_normal(u)?;
                let h = model.conformal_factor(&x);
                Ok((model.to_ambient(&x), model.push_tangent(&x, &(nu * (1.0 / h)))))
            })
            .collect::<Result<Vec<_>>>()?;
        let (points, normals) = pairs.into_iter().unzip();
        Ok(Self::assemble(surface, grid, points, normals, tol))
    }

    /// Reuse the points and normals of an existing curvature sampling.
    pub fn from_sampled(surface: &'a RadialSurface, sampled: &'a SampledSurface, tol: &Tolerances) -> Self {
        let model = surface.model;
        let (points, normals) = sampled
            .samples
            .iter()
            .map(|s| {
                let x = s.point.coords;
                (model.to_ambient(&x), model.push_tangent(&x, &s.normal))
            })
            .unzip();
        Self::assemble(surface, &sampled.grid, points, normals, tol)
    }

    fn assemble(
        surface: &'a RadialSurface,
        grid: &'a DirectionGrid,
        points: Vec<Vector>,
        normals: Vec<Vector>,
        tol: &Tolerances,
    ) -> Self {
        Self {
            surface,
            grid,
            points,
            normals,
            tol_c: tol.containment(surface.scale()),
            tol_s: tol.position(surface.scale()),
            floor: MARGIN_FLOOR_REL * surface.scale(),
        }
    }

    pub fn surface(&self) -> &RadialSurface {
        self.surface
    }

    /// Containment margin accepted by the predicate.
    pub fn containment_tolerance(&self) -> f64 {
        self.tol_c
    }

    /// Bisection width for critical positions.
    pub fn position_tolerance(&self) -> f64 {
        self.tol_s
    }

    fn model(&self) -> SpaceForm {
        self.surface.model
    }

    fn ambient_dir(&self, v: &Vector) -> Result<(Vector, Vector)> {
        if v.len() != self.model().dim {
            return Err(Error::DimensionMismatch {
                expected: self.model().dim,
                found: v.len(),
            });
        }
        let v = v.normalized().ok_or(Error::ZeroVector)?;
        Ok((v, self.model().ambient_direction(&v)))
    }

    fn leaf_coordinates(&self, dir: &Vector) -> Vec<f64> {
        let model = self.model();
        self.points.iter().map(|x| model.leaf_coordinate_ambient(dir, x)).collect()
    }

    /// Minimal containment margin of the reflected cap at level `s`, over
    /// samples sorted by decreasing leaf coordinate; stops early once the
    /// margin drops below `floor`.
    fn reflected_margin(&self, dir: &Vector, order: &[usize], sigma: &[f64], s: f64, floor: f64) -> Result<f64> {
        let plane = self.model().leaf_hyperplane(dir, s);
        let mut worst = f64::INFINITY;
        for &i in order {
            if sigma[i] <= s {
                break;
            }
            let margin = self.surface.margin_ambient(&plane.reflect_ambient(&self.points[i]))?;
            worst = worst.min(margin);
            if worst < floor {
                break;
            }
        }
        Ok(worst)
    }

    /// Containment margins of the reflected cap at level `s`, one per cap
    /// sample in grid order.
    pub fn reflected_margins(&self, v: &Vector, s: f64) -> Result<Vec<f64>> {
        let (_, dir) = self.ambient_dir(v)?;
        let plane = self.model().leaf_hyperplane(&dir, s);
        let model = self.model();
        self.points
            .iter()
            .filter(|x| model.leaf_coordinate_ambient(&dir, x) > s)
            .map(|x| self.surface.margin_ambient(&plane.reflect_ambient(x)))
            .collect()
    }

    /// Critical position `m_v`: bisection on "every reflected cap sample at
    /// level `s` has containment margin above the roundoff floor", to width
    /// `tol_s`. The predicate is then re-checked with the looser `tol_c` at
    /// evenly spaced levels above `m_v`; a failure there marks the run as
    /// non-monotone.
    pub fn critical_position(&self, v: &Vector) -> Result<CriticalPosition> {
        let (v, dir) = self.ambient_dir(v)?;
        let sigma = self.leaf_coordinates(&dir);
        let mut order: Vec<usize> = (0..sigma.len()).collect();
        order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]));
        let mut failure = None;
        let mut holds = |s: f64, floor: f64| match self.reflected_margin(&dir, &order, &sigma, s, -floor) {
            Ok(m) => m >= -floor,
            Err(e) => {
                failure.get_or_insert(e);
                false
            }
        };
        let lo = sigma[order[order.len() - 1]] - BRACKET_PAD;
        let hi = sigma[order[0]] + BRACKET_PAD;
        let mut warnings = Vec::new();
        if holds(lo, self.floor) {
            warnings.push(format!(
                "reflection predicate holds down to the lowest leaf {lo:.6e}; returning that position"
            ));
            return Ok(CriticalPosition {
                direction: v,
                m: lo,
                bracket: (lo, lo),
                monotone: true,
                warnings,
            });
        }
        let (a, b) = bisect_predicate(|s| holds(s, self.floor), lo, hi, self.tol_s);
        let m = 0.5 * (a + b);
        let mut monotone = true;
        for k in 1..=MONOTONICITY_PROBES {
            let t = b + (hi - b) * k as f64 / (MONOTONICITY_PROBES + 1) as f64;
            if !holds(t, self.tol_c) {
                monotone = false;
                warnings.push(format!("reflection predicate fails again at level {t:.9e} above m_v"));
            }
        }
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(CriticalPosition {
            direction: v,
            m,
            bracket: (a, b),
            monotone,
            warnings,
        })
    }

    /// Critical position of every direction, in input order.
    pub fn critical_positions(&self, directions: &[Vector]) -> Result<Vec<CriticalPosition>> {
        directions.par_iter().map(|v| self.critical_position(v)).collect()
    }

    /// Full analysis at the critical position: cap, tangency point, the
    /// component `Sigma`, inner projections and the symmetry defect.
    pub fn critical_cap(&self, v: &Vector) -> Result<MovingPlanesResult> {
        let position = self.critical_position(v)?;
        let (v, dir) = self.ambient_dir(v)?;
        let model = self.model();
        let m = position.m;
        let plane = model.leaf_hyperplane(&dir, m);
        let sigma = self.leaf_coordinates(&dir);
        let cap_indices: Vec<usize> = (0..sigma.len()).filter(|&i| sigma[i] > m).collect();
        if cap_indices.is_empty() {
            return Err(Error::EmptyCap);
        }
        let reflected: Vec<Vector> = cap_indices
            .iter()
            .map(|&i| plane.reflect_ambient(&self.points[i]))
            .collect();
        let margins = reflected
            .par_iter()
            .map(|y| self.surface.margin_ambient(y))
            .collect::<Result<Vec<_>>>()?;

        // Tangency point: minimal margin, ties broken by the smallest leaf.
        let least = margins.iter().copied().fold(f64::INFINITY, f64::min);
        let (slot, sigma_p0) = margins
            .iter()
            .enumerate()
            .filter(|(_, &mg)| mg <= least + TANGENCY_TIE)
            .map(|(k, _)| (k, model.leaf_coordinate_ambient(&dir, &reflected[k])))
            .fold((usize::MAX, f64::INFINITY), |best, cand| if cand.1 < best.1 { cand } else { best });
        let tangency_point = model.point_from(model.from_ambient(&reflected[slot]))?;
        let tangency_kind = if (sigma_p0 - m).abs() <= 2.0 * self.tol_s {
            TangencyKind::Boundary
        } else {
            TangencyKind::Interior
        };

        let component = self.component(&cap_indices, cap_indices[slot]);
        let mut warnings = position.warnings.clone();
        if least < -self.tol_c {
            warnings.push(format!("reflected cap leaves Omega by {:.3e} at m_v", -least));
        }
        let (defect, defect_warnings) = self.defect(&plane, &dir, m, &component)?;
        warnings.extend(defect_warnings);

        let slots: Vec<usize> = {
            let in_component: std::collections::HashSet<usize> = component.iter().copied().collect();
            (0..cap_indices.len()).filter(|&k| in_component.contains(&cap_indices[k])).collect()
        };
        let projected: Vec<Result<ProjectionMatch>> = slots
            .par_iter()
            .map(|&k| {
                let i = cap_indices[k];
                let y = reflected[k];
                let ny = plane.reflect_ambient_vector(&self.normals[i]);
                let p = model.point_from(model.from_ambient(&y))?;
                let np = model.pull_tangent(&p.coords, &ny);
                inner_projection(self.surface, &p, &np)
            })
            .collect();
        let mut matches = Vec::with_capacity(projected.len());
        let mut missed = 0usize;
        for r in projected {
            match r {
                Ok(mt) => matches.push(mt),
                Err(Error::NoIntersection) => missed += 1,
                Err(e) => return Err(e),
            }
        }
        if missed > 0 {
            warnings.push(format!("{missed} inner projections found no intersection"));
        }

        Ok(MovingPlanesResult {
            direction: v,
            m,
            plane,
            tangency_point,
            tangency_kind,
            cap: cap_indices
                .iter()
                .map(|&i| model.from_ambient(&self.points[i]))
                .collect(),
            reflected_cap: reflected.iter().map(|y| model.from_ambient(y)).collect(),
            cap_indices,
            component,
            matches,
            defect,
            monotone: position.monotone,
            warnings,
        })
    }

    /// Connected component of `start` in the grid graph restricted to `cap`,
    /// sorted.
    fn component(&self, cap: &[usize], start: usize) -> Vec<usize> {
        let mut in_cap = vec![false; self.points.len()];
        for &i in cap {
            in_cap[i] = true;
        }
        let mut seen = vec![false; self.points.len()];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        let mut out = Vec::new();
        while let Some(i) = queue.pop_front() {
            out.push(i);
            for &j in &self.grid.neighbors[i] {
                if in_cap[j] && !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// `max_j d(X_j, Sigma u Sigma^pi)`: nearest sample of either cloud,
    /// refined by minimizing over the surface patch around it. Leaving the
    /// cap costs twice the distance to the plane, an exact penalty since the
    /// reflection moves points by at most twice that distance.
    fn defect(&self, plane: &GeodesicHyperplane, dir: &Vector, m: f64, component: &[usize]) -> Result<(f64, Vec<String>)> {
        let model = self.model();
        let originals: Vec<Vector> = component.iter().map(|&i| self.points[i]).collect();
        let mirrored: Vec<Vector> = originals.iter().map(|x| plane.reflect_ambient(x)).collect();
        let mut in_component = vec![false; self.points.len()];
        for &i in component {
            in_component[i] = true;
        }
        let chord = |a: &Vector, b: &Vector| {
            let d = *a - *b;
            model.ambient_inner(&d, &d)
        };
        let nearest = |x: &Vector, cloud: &[Vector]| {
            cloud
                .iter()
                .enumerate()
                .map(|(k, y)| (k, chord(x, y)))
                .fold((0, f64::INFINITY), |best, c| if c.1 < best.1 { c } else { best })
        };
        let spacing = self.grid_spacing();
        let refine = |x: &Vector, slot: usize, reflect: bool| -> Result<f64> {
            let u0 = self.grid.directions[component[slot]];
            let basis = tangent_basis(&u0);
            let mut err = None;
            let objective = |a: &Vector| {
                let u = direction_chart(&u0, &basis, a.as_slice());
                let big = match self.surface.ambient_point(&u) {
                    Ok(big) => big,
                    Err(e) => {
                        err.get_or_insert(e);
                        return f64::INFINITY;
                    }
                };
                let penalty = if model.leaf_coordinate_ambient(dir, &big) > m {
                    0.0
                } else {
                    2.0 * plane.distance_to_ambient(&big)
                };
                let z = if reflect { plane.reflect_ambient(&big) } else { big };
                model.ambient_distance(x, &z) + penalty
            };
            let opts = NelderMeadOptions {
                initial_step: spacing,
                f_tol: 0.0,
                x_tol: 1e-13,
                max_iter: 4000,
            };
            let best = nelder_mead(objective, Vector::zeros(basis.len()), opts);
            match err {
                Some(e) if !best.value.is_finite() => Err(e),
                _ => Ok(best.value),
            }
        };
        let per_sample = (0..self.points.len())
            .into_par_iter()
            .filter(|&j| !in_component[j])
            .map(|j| {
                let x = &self.points[j];
                let (ka, qa) = nearest(x, &mirrored);
                let (kb, qb) = nearest(x, &originals);
                let da = model.ambient_distance(x, &mirrored[ka]);
                let db = model.ambient_distance(x, &originals[kb]);
                let reach = da.min(db) + 2.0 * spacing;
                let mut best = da.min(db);
                if da <= reach {
                    best = best.min(refine(x, ka, true)?);
                }
                if db <= reach && qb.is_finite() && qa.is_finite() {
                    best = best.min(refine(x, kb, false)?);
                }
                Ok(best)
            })
            .collect::<Result<Vec<f64>>>()?;
        let defect = per_sample.into_iter().fold(0.0, f64::max);
        Ok((defect, Vec::new()))
    }

    /// Largest angle between a grid direction and its neighbours.
    fn grid_spacing(&self) -> f64 {
        self.grid
            .edges()
            .map(|(i, j)| {
                let c = self.grid.directions[i].dot(&self.grid.directions[j]).clamp(-1.0, 1.0);
                c.acos()
            })
            .fold(0.0, f64::max)
    }
}

/// Inner projection of `p` onto `S` along the geodesic leaving `p` with
/// velocity `-N_p`, where `normal` is the metric-unit inward normal at `p`
/// in chart components. The first crossing of the containment margin is
/// bisected to `1e-10` in arclength; the search reaches `4 scale`.
pub fn inner_projection(surface: &RadialSurface, p: &ChartPoint, normal: &Vector) -> Result<ProjectionMatch> {
    let model = surface.model;
    let x = p.coords;
    let big_p = model.to_ambient(&x);
    let w = model.push_tangent(&x, &(-*normal));
    let len = model.ambient_inner(&w, &w).sqrt();
    if !(len > 0.0) {
        return Err(Error::ZeroVector);
    }
    let w = w * (1.0 / len);
    let mut err = None;
    let mut margin = |t: f64| match surface.margin_ambient(&model.ambient_geodesic(&big_p, &w, t)) {
        Ok(v) => v,
        Err(e) => {
            err.get_or_insert(e);
            f64::NAN
        }
    };
    let start = margin(0.0);
    let range = match model.kind {
        ModelKind::Spherical => (4.0 * surface.scale()).min(std::f64::consts::PI - 1e-9),
        _ => 4.0 * surface.scale(),
    };
    // Inside points march outward along -N; outside points march back.
    let sign = if start >= 0.0 { 1.0 } else { -1.0 };
    let step = surface.scale() / 64.0;
    let mut t = 0.0;
    let mut crossing = None;
    if start == 0.0 {
        crossing = Some(0.0);
    }
    while crossing.is_none() && t < range {
        let next = (t + step).min(range);
        let value = margin(sign * next);
        if value.is_nan() {
            break;
        }
        if value * sign <= 0.0 {
            crossing = bisect(|s| margin(sign * s), t, next, PROJECTION_TOL);
            break;
        }
        t = next;
    }
    if let Some(e) = err {
        return Err(e);
    }
    let t = crossing.ok_or(Error::NoIntersection)? * sign;
    let big_hat = model.ambient_geodesic(&big_p, &w, t);
    let (_, u) = surface.polar_ambient(&big_hat);
    let u = u.ok_or(Error::NoIntersection)?;
    let (y, nu_hat) = surface.point_and_normal(&u)?;
    let p_hat = model.point_from(y)?;
    let h_hat = model.conformal_factor(&y);
    let moved = model.transport_raw(&y, &x, &(nu_hat * (1.0 / h_hat)));
    let normal_gap = model.conformal_factor(&x) * (*normal - moved).norm();
    Ok(ProjectionMatch {
        p: *p,
        p_hat,
        distance: t.abs(),
        normal_gap,
    })
}
