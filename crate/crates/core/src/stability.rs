//! Centers, radii and the radial graph of a nearly round hypersurface, and
//! the stability report that compares `R - r` with the curvature
//! oscillation.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypersurface::{
    direction_chart, fibonacci_directions, tangent_basis, CurvatureOperator, DirectionGrid, GridSpec, Harmonic,
    RadialSurface, SampledSurface, SurfaceFamily, VolumeQuadrature, DEFAULT_LEVEL,
};
use crate::linalg::Vector;
use crate::moving_planes::MovingPlanes;
use crate::optimize::{bisect, nelder_mead, NelderMeadOptions};
use crate::spaceform::{ChartPoint, GeodesicHyperplane, ModelKind, SpaceForm};
use crate::tolerance::Tolerances;

/// Stop the center-of-mass descent once `|grad P| <= GRADIENT_TOL`.
pub const GRADIENT_TOL: f64 = 1e-10;

/// Residual above which a least-squares center is rejected.
pub const CENTER_RESIDUAL_LIMIT: f64 = 1e-6;

/// Oscillations at or below this are treated as zero when forming ratios:
/// on round spheres the finite-difference curvatures scatter by about
/// `1e-10`, so smaller values carry no signal.
pub const OSC_FLOOR: f64 = 1e-8;

const MAX_DESCENT_STEPS: usize = 500;

/// Normalized mass of `Omega` for the potential
/// `P(x) = (1 / 2|Omega|) int_Omega d(x, a)^2 da`.
pub struct MassDistribution {
    model: SpaceForm,
    quadrature: VolumeQuadrature,
    volume: f64,
}

impl MassDistribution {
    pub fn new(surface: &RadialSurface, grid: &DirectionGrid, radial_nodes: usize) -> Result<Self> {
        let quadrature = surface.volume_quadrature(grid, radial_nodes)?;
        let volume = quadrature.volume();
        Ok(Self {
            model: surface.model,
            quadrature,
            volume,
        })
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    fn potential_ambient(&self, big_x: &Vector) -> f64 {
        let total: f64 = self
            .quadrature
            .points
            .par_iter()
            .zip(&self.quadrature.weights)
            .map(|(a, w)| {
                let d = self.model.ambient_distance(big_x, a);
                w * d * d
            })
            .sum();
        0.5 * total / self.volume
    }

    /// `-(1/|Omega|) int exp_x^{-1}(a) da` as an ambient tangent vector.
    fn gradient_ambient(&self, big_x: &Vector) -> Vector {
        let model = self.model;
        let zero = Vector::zeros(model.ambient_dim());
        let total = self
            .quadrature
            .points
            .par_iter()
            .zip(&self.quadrature.weights)
            .map(|(a, w)| {
                let d = model.ambient_distance(big_x, a);
                model.ambient_log(big_x, a, d) * *w
            })
            .reduce(|| zero, |a, b| a + b);
        total * (-1.0 / self.volume)
    }

    pub fn potential(&self, p: &ChartPoint) -> f64 {
        self.potential_ambient(&p.ambient())
    }

    /// Riemannian gradient of the potential in chart components.
    pub fn gradient(&self, p: &ChartPoint) -> Vector {
        self.model.pull_tangent(&p.coords, &self.gradient_ambient(&p.ambient()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CenterOfMass {
    pub point: ChartPoint,
    /// Metric norm of the potential gradient at `point`.
    pub residual: f64,
    pub iterations: usize,
}

/// Riemannian center of mass: descent along `-grad P` from the surface base
/// with unit steps, halved until the potential decreases.
pub fn center_of_mass(surface: &RadialSurface, grid: &DirectionGrid, radial_nodes: usize) -> Result<CenterOfMass> {
    let mass = MassDistribution::new(surface, grid, radial_nodes)?;
    let model = surface.model;
    let mut x = *surface.ambient_base();
    let mut p = mass.potential_ambient(&x);
    let mut grad = mass.gradient_ambient(&x);
    let mut norm = model.ambient_inner(&grad, &grad).max(0.0).sqrt();
    let mut iterations = 0;
    while norm > GRADIENT_TOL && iterations < MAX_DESCENT_STEPS {
        iterations += 1;
        let dir = grad * (-1.0 / norm);
        let mut step = norm;
        let mut accepted = false;
        for _ in 0..60 {
            let candidate = model.renormalize(&model.ambient_geodesic(&x, &dir, step));
            let pc = mass.potential_ambient(&candidate);
            if pc <= p {
                x = candidate;
                p = pc;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        grad = mass.gradient_ambient(&x);
        norm = model.ambient_inner(&grad, &grad).max(0.0).sqrt();
        if !accepted {
            break;
        }
    }
    if norm > GRADIENT_TOL.max(1e-8) {
        return Err(Error::NoConvergence {
            what: "center of mass",
            iterations,
            residual: norm,
        });
    }
    Ok(CenterOfMass {
        point: model.point_from(model.from_ambient(&x))?,
        residual: norm,
        iterations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproximateCenter {
    pub point: ChartPoint,
    /// `sqrt(sum_i d(O, pi_i)^2)`.
    pub residual: f64,
    pub positions: Vec<f64>,
    pub planes: Vec<GeodesicHyperplane>,
}

/// Least-squares intersection of the critical hyperplanes of the chart axes
/// at the origin: exact linear algebra when the planes meet, Nelder–Mead on
/// `sum_i d(x, pi_i)^2` when hyperbolic planes miss each other.
pub fn approximate_center(planes: &MovingPlanes<'_>) -> Result<ApproximateCenter> {
    let surface = planes.surface();
    let model = surface.model;
    let n = model.dim;
    let axes: Vec<Vector> = (0..n).map(|i| Vector::basis(n, i)).collect();
    let positions: Vec<f64> = planes.critical_positions(&axes)?.into_iter().map(|p| p.m).collect();
    let pis: Vec<GeodesicHyperplane> = axes
        .iter()
        .zip(&positions)
        .map(|(v, m)| model.leaf_hyperplane(&model.ambient_direction(v), *m))
        .collect();
    let residual_of = |x: &Vector| -> f64 {
        pis.iter()
            .map(|pi| pi.distance_to_ambient(x).powi(2))
            .sum::<f64>()
            .sqrt()
    };
    let a = DMatrix::from_fn(n, model.ambient_dim(), |i, j| {
        let sign = if model.kind == ModelKind::Hyperbolic && j == n { -1.0 } else { 1.0 };
        sign * pis[i].normal[j]
    });
    let big_x = match model.kind {
        ModelKind::Euclidean => {
            let b = DVector::from_fn(n, |i, _| pis[i].offset);
            let sol = a.lu().solve(&b).ok_or(Error::DegenerateFrame)?;
            Some(Vector::from_fn(n, |i| sol[i]))
        }
        _ => {
            let null = null_vector(&a);
            let q = model.ambient_inner(&null, &null);
            match model.kind {
                ModelKind::Spherical => Some(null * (null[n].signum() / q.sqrt())),
                _ if q < 0.0 => Some(null * (null[n].signum() / (-q).sqrt())),
                _ => None,
            }
        }
    };
    let big_x = match big_x {
        Some(x) => x,
        None => {
            // Planes without a common point: minimize the squared distances
            // over the hyperboloid, parametrized by the chart with a log
            // height.
            let start = *surface.ambient_base();
            let x0 = model.from_ambient(&start);
            let to_chart = |y: &Vector| {
                let mut c = *y;
                c[n - 1] = y[n - 1].exp();
                c
            };
            let mut y0 = x0;
            y0[n - 1] = x0[n - 1].ln();
            let best = nelder_mead(
                |y| residual_of(&model.to_ambient(&to_chart(y))).powi(2),
                y0,
                NelderMeadOptions {
                    initial_step: 0.05,
                    f_tol: 1e-30,
                    x_tol: 1e-14,
                    max_iter: 20_000,
                },
            );
            model.to_ambient(&to_chart(&best.x))
        }
    };
    let point = model.point_from(model.from_ambient(&big_x))?;
    Ok(ApproximateCenter {
        point,
        residual: residual_of(&big_x),
        positions,
        planes: pis,
    })
}

/// Right singular vector of the smallest singular value of an `n x (n+1)`
/// matrix: its null direction.
fn null_vector(a: &DMatrix<f64>) -> Vector {
    let cols = a.ncols();
    let gram = a.transpose() * a;
    let eig = nalgebra::SymmetricEigen::new(gram);
    let k = (0..cols)
        .min_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]))
        .expect("nonempty");
    Vector::from_fn(cols, |i| eig.eigenvectors[(i, k)])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Radii {
    pub r: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    /// Surface directions (base frame) of the closest and farthest points.
    pub argmin: Vector,
    pub argmax: Vector,
}

/// Inradius and circumradius of `Omega` about `center`: extremal sample
/// distances refined by Nelder–Mead over the surface parametrization.
pub fn radii(surface: &RadialSurface, grid: &DirectionGrid, center: &ChartPoint) -> Result<Radii> {
    let model = surface.model;
    let c = center.ambient();
    if surface.margin_ambient(&c)? <= 0.0 {
        return Err(Error::NotStarShaped("the center lies outside Omega".into()));
    }
    let dists = grid
        .directions
        .par_iter()
        .map(|u| Ok(model.ambient_distance(&c, &surface.ambient_point(u)?)))
        .collect::<Result<Vec<f64>>>()?;
    let (imin, imax) = dists
        .iter()
        .enumerate()
        .fold((0, 0), |(lo, hi), (i, d)| {
            (if *d < dists[lo] { i } else { lo }, if *d > dists[hi] { i } else { hi })
        });
    let spacing = grid_spacing(grid);
    let refine = |i: usize, sign: f64| -> Result<(f64, Vector)> {
        let u0 = grid.directions[i];
        let basis = tangent_basis(&u0);
        let objective = |a: &Vector| {
            let u = direction_chart(&u0, &basis, a.as_slice());
            surface
                .ambient_point(&u)
                .map(|x| sign * model.ambient_distance(&c, &x))
                .unwrap_or(f64::INFINITY)
        };
        let best = nelder_mead(
            objective,
            Vector::zeros(basis.len()),
            NelderMeadOptions {
                initial_step: 0.5 * spacing,
                f_tol: 0.0,
                x_tol: 1e-12,
                max_iter: 4000,
            },
        );
        let u = direction_chart(&u0, &basis, best.x.as_slice());
        Ok(((sign * best.value).min(f64::MAX), u))
    };
    let (r, argmin) = refine(imin, 1.0)?;
    let (big_r, argmax) = refine(imax, -1.0)?;
    Ok(Radii {
        r: r.min(dists[imin]),
        big_r: big_r.max(dists[imax]),
        argmin,
        argmax,
    })
}

/// Largest angle between neighbouring grid directions.
pub fn grid_spacing(grid: &DirectionGrid) -> f64 {
    grid.edges()
        .map(|(i, j)| grid.directions[i].dot(&grid.directions[j]).clamp(-1.0, 1.0).acos())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaneDistance {
    pub direction: Vector,
    pub m: f64,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaneDistances {
    pub max: f64,
    pub profile: Vec<PlaneDistance>,
}

/// `d(O, pi_v)` for every direction, from the closed-form distance to a
/// totally geodesic hyperplane.
pub fn center_plane_distances(planes: &MovingPlanes<'_>, center: &ChartPoint, directions: &[Vector]) -> Result<PlaneDistances> {
    let model = planes.surface().model;
    let c = center.ambient();
    let profile: Vec<PlaneDistance> = planes
        .critical_positions(directions)?
        .into_iter()
        .map(|pos| {
            let pi = model.leaf_hyperplane(&model.ambient_direction(&pos.direction), pos.m);
            PlaneDistance {
                distance: pi.distance_to_ambient(&c),
                direction: pos.direction,
                m: pos.m,
            }
        })
        .collect();
    let max = profile.iter().map(|p| p.distance).fold(0.0, f64::max);
    Ok(PlaneDistances { max, profile })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGraph {
    /// `Psi(u) = d(O, S along u) - r`, grid order.
    pub psi: Vec<f64>,
    pub psi_sup: f64,
    /// Largest first-difference quotient over grid edges, measured on the
    /// distance sphere of radius `r` about `O`.
    pub psi_grad_sup: f64,
}

/// Orthonormal ambient frame at `x`: the origin's chart axes transported
/// along the geodesic from the origin.
fn transported_frame(model: &SpaceForm, big_x: &Vector) -> Vec<Vector> {
    let o = model.ambient_origin();
    (0..model.dim)
        .map(|i| {
            let e = model.ambient_direction(&Vector::basis(model.dim, i));
            model.ambient_transport(&o, big_x, &e)
        })
        .collect()
}

/// Exit distance along the geodesic ray from `c` (inside `Omega`) with unit
/// ambient direction `w`; errors when the ray re-enters `Omega`.
fn radial_exit(surface: &RadialSurface, c: &Vector, w: &Vector) -> Result<f64> {
    let model = surface.model;
    let scale = surface.scale();
    let step = scale / 64.0;
    let limit = match model.kind {
        ModelKind::Spherical => (4.0 * scale).min(std::f64::consts::PI - 1e-6),
        _ => 4.0 * scale,
    };
    let at = |t: f64| surface.margin_ambient(&model.ambient_geodesic(c, w, t));
    let mut lo = 0.0;
    let mut exit = None;
    while lo < limit {
        let hi = (lo + step).min(limit);
        let m = at(hi)?;
        match exit {
            None if m <= 0.0 => {
                let root = bisect(|t| at(t).unwrap_or(f64::NAN), lo, hi, 1e-13 * (1.0 + hi));
                exit = Some(root.ok_or(Error::NoIntersection)?);
            }
            Some(t) if m > 0.0 => {
                return Err(Error::NotStarShaped(format!(
                    "ray re-enters Omega at distance {hi:.6} after leaving at {t:.6}"
                )))
            }
            _ => {}
        }
        lo = hi;
    }
    exit.ok_or(Error::NoIntersection)
}

pub fn radial_graph(surface: &RadialSurface, grid: &DirectionGrid, center: &ChartPoint, r: f64) -> Result<RadialGraph> {
    let model = surface.model;
    let c = center.ambient();
    let frame = transported_frame(&model, &c);
    let psi = grid
        .directions
        .par_iter()
        .map(|u| {
            let mut w = Vector::zeros(model.ambient_dim());
            for (ui, e) in u.as_slice().iter().zip(&frame) {
                w = w.axpy(*ui, e);
            }
            Ok(radial_exit(surface, &c, &w)? - r)
        })
        .collect::<Result<Vec<f64>>>()?;
    let psi_sup = psi.iter().map(|p| p.abs()).fold(0.0, f64::max);
    let sphere_scale = model.sn(r);
    let psi_grad_sup = grid
        .edges()
        .map(|(i, j)| {
            let angle = grid.directions[i].dot(&grid.directions[j]).clamp(-1.0, 1.0).acos();
            (psi[i] - psi[j]).abs() / (sphere_scale * angle)
        })
        .fold(0.0, f64::max);
    Ok(RadialGraph {
        psi,
        psi_sup,
        psi_grad_sup,
    })
}

/// Knobs of the stability pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StabilityConfig {
    pub grid_level: usize,
    pub radial_nodes: usize,
    /// Low-discrepancy directions for the plane-distance profile.
    pub plane_directions: usize,
    /// Measure symmetry defects along the chart axes (moving-plane caps).
    pub measure_defects: bool,
    pub tolerances: Tolerances,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        Self {
            grid_level: DEFAULT_LEVEL,
            radial_nodes: 64,
            plane_directions: 50,
            measure_defects: true,
            tolerances: Tolerances::default(),
        }
    }
}

/// Symmetry defect along one axis and its ratio to the deficit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisDefect {
    pub direction: Vector,
    pub m: f64,
    pub defect: f64,
    /// `defect / deficit`; infinite when the deficit vanishes.
    pub asp_constant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub model: SpaceForm,
    pub family: SurfaceFamily,
    pub operator: CurvatureOperator,
    pub grid: GridSpec,
    pub osc: f64,
    /// Deficit used in the ratios; equal to `osc` unless a custom deficit
    /// was supplied.
    pub deficit: f64,
    pub center: ChartPoint,
    pub center_residual: f64,
    pub center_of_mass: ChartPoint,
    pub center_of_mass_distance: f64,
    pub r: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    /// `(R - r) / deficit`; `None` when the deficit is at most [`OSC_FLOOR`].
    pub ratio: Option<f64>,
    pub max_center_plane_distance: f64,
    pub plane_distances: Vec<PlaneDistance>,
    pub psi_sup: f64,
    pub psi_grad_sup: f64,
    pub axis_defects: Vec<AxisDefect>,
    pub valid: bool,
    pub failing_stage: Option<String>,
    pub invariant_violations: Vec<String>,
}

impl StabilityReport {
    pub fn gap(&self) -> f64 {
        self.big_r - self.r
    }
}

/// A deficit `def(Omega)` computed from the sampled surface.
pub type Deficit<'a> = &'a (dyn Fn(&SampledSurface, &CurvatureOperator) -> Result<f64> + Sync);

/// Stability report with `def(Omega) = osc(H_S)`.
pub fn stability_report(surface: &RadialSurface, op: &CurvatureOperator, config: &StabilityConfig) -> Result<StabilityReport> {
    stability_report_with(surface, op, config, &|s: &SampledSurface, op: &CurvatureOperator| s.osc(op))
}

pub fn stability_report_with(
    surface: &RadialSurface,
    op: &CurvatureOperator,
    config: &StabilityConfig,
    deficit: Deficit<'_>,
) -> Result<StabilityReport> {
    let spec = GridSpec::new(surface.dim(), config.grid_level);
    let grid = DirectionGrid::new(spec)?;
    let sampled = surface.sample(&grid)?;
    let osc = sampled.osc(op)?;
    let def = deficit(&sampled, op)?;
    let planes = MovingPlanes::from_sampled(surface, &sampled, &config.tolerances);

    let approx = approximate_center(&planes)?;
    let mut failing_stage = None;
    if approx.residual > CENTER_RESIDUAL_LIMIT {
        failing_stage = Some(format!(
            "approximate center: plane residual {:.3e} exceeds {CENTER_RESIDUAL_LIMIT:e}",
            approx.residual
        ));
    }
    let com = center_of_mass(surface, &grid, config.radial_nodes)?;
    let model = surface.model;
    let com_distance = model.distance(&com.point, &approx.point)?;

    let rad = radii(surface, &grid, &approx.point)?;
    let directions = fibonacci_directions(surface.dim(), config.plane_directions)?;
    let dists = center_plane_distances(&planes, &approx.point, &directions)?;
    let graph = radial_graph(surface, &grid, &approx.point, rad.r)?;

    let mut axis_defects = Vec::new();
    if config.measure_defects {
        for i in 0..surface.dim() {
            let v = Vector::basis(surface.dim(), i);
            let res = planes.critical_cap(&v)?;
            axis_defects.push(AxisDefect {
                direction: v,
                m: res.m,
                defect: res.defect,
                asp_constant: if def > OSC_FLOOR { res.defect / def } else { f64::INFINITY },
            });
        }
    }

    let mut violations = Vec::new();
    if !(rad.r > 0.0 && rad.r <= rad.big_r) {
        violations.push(format!("radii out of order: r = {}, R = {}", rad.r, rad.big_r));
    }
    let c = approx.point.ambient();
    for (u, s) in grid.directions.iter().zip(&sampled.samples) {
        let d = model.ambient_distance(&c, &s.point.ambient());
        if d < rad.r - 1e-8 || d > rad.big_r + 1e-8 {
            violations.push(format!("sample {u:?} at distance {d} outside [r, R]"));
            break;
        }
    }
    if graph.psi_sup > rad.big_r - rad.r + 1e-8 {
        violations.push(format!(
            "Psi_sup {} exceeds R - r = {}",
            graph.psi_sup,
            rad.big_r - rad.r
        ));
    }
    if failing_stage.is_none() && !violations.is_empty() {
        failing_stage = Some("containment invariants".into());
    }

    Ok(StabilityReport {
        model,
        family: surface.family.clone(),
        operator: op.clone(),
        grid: spec,
        osc,
        deficit: def,
        center: approx.point,
        center_residual: approx.residual,
        center_of_mass: com.point,
        center_of_mass_distance: com_distance,
        r: rad.r,
        big_r: rad.big_r,
        ratio: (def > OSC_FLOOR).then(|| (rad.big_r - rad.r) / def),
        max_center_plane_distance: dists.max,
        plane_distances: dists.profile,
        psi_sup: graph.psi_sup,
        psi_grad_sup: graph.psi_grad_sup,
        axis_defects,
        valid: failing_stage.is_none(),
        failing_stage,
        invariant_violations: violations,
    })
}

/// One-parameter surface families swept over `eps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SweepFamily {
    /// Chart ellipsoid with semi-axes `(1 + eps, 1, ..., 1)`.
    Spheroid,
    PerturbedSphere { radius: f64, harmonic: Harmonic },
}

impl SweepFamily {
    pub fn instance(&self, dim: usize, eps: f64) -> SurfaceFamily {
        match self {
            SweepFamily::Spheroid => SurfaceFamily::spheroid(dim, eps),
            SweepFamily::PerturbedSphere { radius, harmonic } => SurfaceFamily::PerturbedSphere {
                radius: *radius,
                eps,
                harmonic: *harmonic,
            },
        }
    }

    pub fn name(&self) -> String {
        match self {
            SweepFamily::Spheroid => "spheroid".into(),
            SweepFamily::PerturbedSphere { radius, harmonic } => format!("perturbed_sphere(r={radius},{harmonic})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub model: String,
    pub family: String,
    pub eps: f64,
    pub osc: f64,
    pub r: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    pub gap: f64,
    pub ratio: Option<f64>,
    pub maxdist: f64,
    pub psi_sup: f64,
    pub psi_grad_sup: f64,
    /// `psi_grad_sup / sqrt(osc)`; `None` when the oscillation vanishes.
    pub psi_grad_scaled: Option<f64>,
    pub com_distance: f64,
    pub valid: bool,
}

impl SweepRow {
    pub fn from_report(report: &StabilityReport, family: &str, eps: f64) -> Self {
        Self {
            model: report.model.kind.to_string(),
            family: family.into(),
            eps,
            osc: report.osc,
            r: report.r,
            big_r: report.big_r,
            gap: report.gap(),
            ratio: report.ratio,
            maxdist: report.max_center_plane_distance,
            psi_sup: report.psi_sup,
            psi_grad_sup: report.psi_grad_sup,
            psi_grad_scaled: (report.osc > OSC_FLOOR).then(|| report.psi_grad_sup / report.osc.sqrt()),
            com_distance: report.center_of_mass_distance,
            valid: report.valid,
        }
    }

    /// Placeholder for a row whose pipeline run failed: every measurement is
    /// NaN and the row is invalid.
    pub fn failed(model: &str, family: &str, eps: f64) -> Self {
        Self {
            model: model.into(),
            family: family.into(),
            eps,
            osc: f64::NAN,
            r: f64::NAN,
            big_r: f64::NAN,
            gap: f64::NAN,
            ratio: None,
            maxdist: f64::NAN,
            psi_sup: f64::NAN,
            psi_grad_sup: f64::NAN,
            psi_grad_scaled: None,
            com_distance: f64::NAN,
            valid: false,
        }
    }

    /// Largest relative change of `osc`, `R - r` and the ratio between two
    /// runs of the same surface.
    pub fn relative_change(&self, other: &SweepRow) -> f64 {
        let rel = |a: f64, b: f64| if a == b { 0.0 } else { (a - b).abs() / a.abs().max(b.abs()) };
        let ratio = match (self.ratio, other.ratio) {
            (Some(a), Some(b)) => rel(a, b),
            (None, None) => 0.0,
            _ => f64::INFINITY,
        };
        rel(self.osc, other.osc).max(rel(self.gap, other.gap)).max(ratio)
    }

    /// Plot pairs `(osc, R - r)` and `(osc, psi_grad_sup^2)`.
    pub fn plot_points(&self) -> ([f64; 2], [f64; 2]) {
        ([self.osc, self.gap], [self.osc, self.psi_grad_sup * self.psi_grad_sup])
    }
}

/// Reports for `family(eps)` centered at the chart origin, one per `eps`.
pub fn sweep(
    model: SpaceForm,
    family: &SweepFamily,
    eps: &[f64],
    op: &CurvatureOperator,
    config: &StabilityConfig,
) -> Result<Vec<(StabilityReport, SweepRow)>> {
    let name = family.name();
    eps.iter()
        .map(|&e| {
            let surface = RadialSurface::centered(model, family.instance(model.dim, e))?;
            let report = stability_report(&surface, op, config)?;
            let row = SweepRow::from_report(&report, &name, e);
            Ok((report, row))
        })
        .collect()
}

/// Sweep table as CSV with columns `model, family, eps, osc, r, R,
/// R_minus_r, ratio, maxdist, psi_sup, psi_grad_sup, psi_grad_over_sqrt_osc,
/// com_distance, valid`. Numbers carry 12 significant digits; ratios of a
/// vanishing oscillation read `undefined`.
pub fn write_sweep_csv<W: Write>(out: W, rows: &[SweepRow]) -> Result<()> {
    let io = |e: csv::Error| Error::InvalidArgument(format!("csv output failed: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "model",
        "family",
        "eps",
        "osc",
        "r",
        "R",
        "R_minus_r",
        "ratio",
        "maxdist",
        "psi_sup",
        "psi_grad_sup",
        "psi_grad_over_sqrt_osc",
        "com_distance",
        "valid",
    ])
    .map_err(io)?;
    let num = |v: f64| format!("{v:.11e}");
    for row in rows {
        w.write_record([
            row.model.clone(),
            row.family.clone(),
            num(row.eps),
            num(row.osc),
            num(row.r),
            num(row.big_r),
            num(row.gap),
            row.ratio.map(num).unwrap_or_else(|| "undefined".into()),
            num(row.maxdist),
            num(row.psi_sup),
            num(row.psi_grad_sup),
            row.psi_grad_scaled.map(num).unwrap_or_else(|| "undefined".into()),
            num(row.com_distance),
            row.valid.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::InvalidArgument(format!("csv output failed: {e}")))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(level: usize) -> DirectionGrid {
        DirectionGrid::new(GridSpec::new(3, level)).unwrap()
    }

    #[test]
    fn sphere_center_of_mass_is_its_center() {
        let g = grid(3);
        for model in [SpaceForm::euclidean(3), SpaceForm::hyperbolic(3), SpaceForm::spherical(3)] {
            let c = model.point_from(model.origin().coords + Vector::from_slice(&[0.1, -0.05, 0.08])).unwrap();
            let s = RadialSurface::at(model, c, SurfaceFamily::GeodesicSphere { radius: 0.6 }).unwrap();
            let com = center_of_mass(&s, &g, 16).unwrap();
            assert!(model.distance(&com.point, &c).unwrap() < 1e-6, "{model:?}");
        }
    }

    #[test]
    fn gradient_matches_finite_differences_of_the_potential() {
        let e = SpaceForm::euclidean(3);
        let ball = RadialSurface::at(e, e.point(&[0.5, 0.0, 0.2]).unwrap(), SurfaceFamily::GeodesicSphere { radius: 1.0 }).unwrap();
        let mass = MassDistribution::new(&ball, &grid(2), 12).unwrap();
        let x = e.point(&[0.1, 0.3, -0.4]).unwrap();
        let g = mass.gradient(&x);
        let h = 1e-5;
        for i in 0..3 {
            let mut a = x;
            let mut b = x;
            a.coords[i] += h;
            b.coords[i] -= h;
            let fd = (mass.potential(&a) - mass.potential(&b)) / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-5, "{fd} vs {}", g[i]);
        }
        // For a ball the gradient is x minus the center.
        assert!((g - (x.coords - Vector::from_slice(&[0.5, 0.0, 0.2]))).max_abs() < 1e-6);
    }

    #[test]
    fn ellipsoid_radii_are_its_semi_axes() {
        let s = RadialSurface::centered(SpaceForm::euclidean(3), SurfaceFamily::ChartEllipsoid { axes: vec![2.0, 1.0, 1.0] }).unwrap();
        let rad = radii(&s, &grid(3), &s.base).unwrap();
        assert!((rad.r - 1.0).abs() < 1e-8 && (rad.big_r - 2.0).abs() < 1e-8, "{rad:?}");
        let s = RadialSurface::centered(SpaceForm::euclidean(3), SurfaceFamily::spheroid(3, 0.05)).unwrap();
        let rad = radii(&s, &grid(3), &s.base).unwrap();
        assert!((rad.big_r - rad.r - 0.05).abs() < 1e-6);
        let graph = radial_graph(&s, &grid(3), &s.base, rad.r).unwrap();
        assert!((graph.psi_sup - 0.05).abs() < 1e-6);
    }

    #[test]
    fn sphere_radial_graph_vanishes() {
        let h = SpaceForm::hyperbolic(3);
        let s = RadialSurface::centered(h, SurfaceFamily::GeodesicSphere { radius: 0.9 }).unwrap();
        let g = grid(3);
        let rad = radii(&s, &g, &s.base).unwrap();
        assert!((rad.r - 0.9).abs() < 1e-12 && (rad.big_r - 0.9).abs() < 1e-12);
        let graph = radial_graph(&s, &g, &s.base, rad.r).unwrap();
        assert!(graph.psi_sup < 1e-10, "{}", graph.psi_sup);
    }

    #[test]
    fn center_outside_is_rejected() {
        let e = SpaceForm::euclidean(3);
        let s = RadialSurface::centered(e, SurfaceFamily::GeodesicSphere { radius: 1.0 }).unwrap();
        let far = e.point(&[3.0, 0.0, 0.0]).unwrap();
        assert!(matches!(radii(&s, &grid(2), &far), Err(Error::NotStarShaped(_))));
    }

    #[test]
    fn approximate_center_of_translated_spheres() {
        let g = grid(3);
        for model in [SpaceForm::euclidean(3), SpaceForm::hyperbolic(3), SpaceForm::spherical(3)] {
            let c = model.point_from(model.origin().coords + Vector::from_slice(&[0.2, -0.1, 0.05])).unwrap();
            let s = RadialSurface::at(model, c, SurfaceFamily::GeodesicSphere { radius: 0.5 }).unwrap();
            let mp = MovingPlanes::new(&s, &g, &Tolerances::default()).unwrap();
            let center = approximate_center(&mp).unwrap();
            assert!(model.distance(&center.point, &c).unwrap() < 1e-6, "{model:?}: {:?}", center.point);
            assert!(center.residual < 1e-8);
        }
    }

    #[test]
    fn sweep_csv_has_the_documented_columns() {
        let row = SweepRow {
            model: "euclidean".into(),
            family: "spheroid".into(),
            eps: 0.1,
            osc: 0.2,
            r: 1.0,
            big_r: 1.1,
            gap: 0.1,
            ratio: None,
            maxdist: 0.0,
            psi_sup: 0.1,
            psi_grad_sup: 0.2,
            psi_grad_scaled: None,
            com_distance: 0.0,
            valid: true,
        };
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &[row]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("model,family,eps,osc,r,R,R_minus_r,ratio,maxdist,psi_sup,psi_grad_sup"));
        assert!(text.lines().nth(1).unwrap().contains(",undefined,"));
    }
}
