//! Curvature of the curve cut from a surface by a totally geodesic plane,
//! and of its orthogonal shadow on `{x_n = 0}` in an origin chart.
//!
//! The cut curve `U' = S ∩ pi` is traced on the direction sphere: with `d0`
//! the base direction pointing to the positive side of `pi`, each half great
//! circle from `d0` to `-d0` crosses `pi` once, located by bisection to full
//! precision. Curve derivatives come from sixth-order differences in the
//! azimuth. The curvature of `U'` inside `pi` is its normal curvature in the
//! ambient space along the in-plane normal, since `pi` is totally geodesic;
//! for the conformal metric that is `(K . nu' - d_nu' log h) / h` with `K` the
//! Euclidean curvature vector and `nu'` the Euclidean-unit in-plane normal.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{CheckTag, InequalityCheck, LemmaReport};
use crate::error::{Error, Result};
use crate::hypersurface::{tangent_basis, RadialSurface};
use crate::linalg::Vector;
use crate::moving_planes::{MovingPlanes, MovingPlanesResult};
use crate::optimize::{bisect, D1_WEIGHTS, D2_CENTER, D2_WEIGHTS, STENCIL_OFFSETS};
use crate::spaceform::{ChartIsometry, ChartPoint, GeodesicHyperplane};

/// Samples with `g(omega, N)^2` this close to 1 are skipped: the plane is
/// nearly tangent to the surface there.
pub const TANGENTIAL_LIMIT: f64 = 1e-6;
/// Skip the shadow check where the plane is this close to vertical.
const VERTICAL_LIMIT: f64 = 1e-6;
/// Skip the shadow check where the shadow's speed drops below this fraction
/// of the curve's.
const SHADOW_SPEED_LIMIT: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CutSpec {
    /// Points along the cut curve.
    pub samples: usize,
    /// Azimuth step of the difference stencil (radians).
    pub step: f64,
}

impl Default for CutSpec {
    fn default() -> Self {
        Self { samples: 48, step: 1e-2 }
    }
}

/// Point and normal defining the origin chart `phi` in which the shadow is
/// taken: `phi` sends `point` to the chart origin and `normal` (chart
/// components) to a positive multiple of `e_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartAnchor {
    pub point: ChartPoint,
    pub normal: Vector,
}

struct CutCurve<'a> {
    surface: &'a RadialSurface,
    plane: &'a GeodesicHyperplane,
    d0: Vector,
    basis: Vec<Vector>,
}

impl<'a> CutCurve<'a> {
    fn new(surface: &'a RadialSurface, plane: &'a GeodesicHyperplane) -> Result<Self> {
        let model = surface.model;
        let n = model.dim;
        let w = model.tangent_projection(surface.ambient_base(), &plane.normal);
        let d0 = Vector::from_fn(n, |i| model.ambient_inner(&w, &surface.ambient_direction(&Vector::basis(n, i))))
            .normalized()
            .ok_or(Error::NoIntersection)?;
        let basis = tangent_basis(&d0);
        Ok(Self {
            surface,
            plane,
            d0,
            basis,
        })
    }

    fn direction(&self, theta: f64) -> Result<Vector> {
        let e = self.basis[0] * theta.cos() + self.basis[1] * theta.sin();
        let along = |phi: f64| self.d0 * phi.cos() + e * phi.sin();
        let phi = bisect(
            |phi| {
                self.surface
                    .ambient_point(&along(phi))
                    .map(|x| self.plane.signed_value(&x))
                    .unwrap_or(f64::NAN)
            },
            0.0,
            std::f64::consts::PI,
            0.0,
        )
        .ok_or(Error::NoIntersection)?;
        Ok(along(phi))
    }

    fn point(&self, theta: f64) -> Result<Vector> {
        self.surface.point_coords(&self.direction(theta)?)
    }

    /// Anchor at the surface point in direction `d0`.
    fn default_anchor(&self) -> Result<ChartAnchor> {
        let (x, nu) = self.surface.point_and_normal(&self.d0)?;
        Ok(ChartAnchor {
            point: self.surface.model.point_from(x)?,
            normal: nu,
        })
    }
}

/// First and second derivatives from the six off-center stencil values.
fn derivatives(center: &Vector, stencil: &[Vector; 6], h: f64) -> (Vector, Vector) {
    let mut d1 = Vector::zeros(center.len());
    let mut d2 = *center * (D2_CENTER / (h * h));
    for ((w1, w2), f) in D1_WEIGHTS.iter().zip(&D2_WEIGHTS).zip(stencil) {
        d1 = d1.axpy(w1 / h, f);
        d2 = d2.axpy(w2 / (h * h), f);
    }
    (d1, d2)
}

/// Curvature of a curve inside the conformal model along the Euclidean-unit
/// normal `nu`, from chart derivatives at chart point `x`.
fn conformal_normal_curvature(model: &crate::SpaceForm, x: &Vector, d1: &Vector, d2: &Vector, nu: &Vector) -> f64 {
    let speed2 = d1.norm_squared();
    let t = *d1 * (1.0 / speed2.sqrt());
    let k = (*d2 - t * d2.dot(&t)) * (1.0 / speed2);
    (k.dot(nu) - model.grad_log_factor(x).dot(nu)) / model.conformal_factor(x)
}

/// Projected-normal identity, curvature sandwich and shadow bound along the
/// cut of `surface` by `plane`, with the shadow taken in the origin chart of
/// the surface point in the direction of the plane.
pub fn verify_projection_curvature(surface: &RadialSurface, plane: &GeodesicHyperplane, spec: &CutSpec) -> Result<LemmaReport> {
    check_dimension(surface)?;
    let curve = CutCurve::new(surface, plane)?;
    let anchor = curve.default_anchor()?;
    run(&curve, &anchor, spec)
}

/// As [`verify_projection_curvature`] with an explicit shadow chart.
pub fn verify_projection_curvature_at(
    surface: &RadialSurface,
    plane: &GeodesicHyperplane,
    anchor: &ChartAnchor,
    spec: &CutSpec,
) -> Result<LemmaReport> {
    check_dimension(surface)?;
    run(&CutCurve::new(surface, plane)?, anchor, spec)
}

/// The checks along the boundary of a critical cap, with the shadow taken in
/// the origin chart of the tangency point.
pub fn verify_cap_boundary(mp: &MovingPlanes, result: &MovingPlanesResult, spec: &CutSpec) -> Result<LemmaReport> {
    let surface = mp.surface();
    check_dimension(surface)?;
    let (_, dir) = surface.polar_ambient(&result.tangency_point.ambient());
    let dir = dir.ok_or(Error::ZeroVector)?;
    let (x, nu) = surface.point_and_normal(&dir)?;
    let anchor = ChartAnchor {
        point: surface.model.point_from(x)?,
        normal: nu,
    };
    run(&CutCurve::new(surface, &result.plane)?, &anchor, spec)
}

fn check_dimension(surface: &RadialSurface) -> Result<()> {
    if surface.dim() == 3 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "cut-curve checks need n = 3 (the cut is a curve), got n = {}",
            surface.dim()
        )))
    }
}

fn run(curve: &CutCurve, anchor: &ChartAnchor, spec: &CutSpec) -> Result<LemmaReport> {
    if spec.samples == 0 || !(spec.step > 0.0 && spec.step < 0.1) {
        return Err(Error::InvalidArgument("cut sampling needs samples > 0 and 0 < step < 0.1".into()));
    }
    let surface = curve.surface;
    let model = surface.model;
    let n = model.dim;
    let phi = model.origin_chart_with_normal(&anchor.point, &anchor.point.tangent(anchor.normal))?;
    let mut report = LemmaReport::default();
    for k in 0..spec.samples {
        let theta = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / spec.samples as f64;
        let u0 = curve.direction(theta)?;
        let sample = surface.principal_curvatures(&u0)?;
        let q = sample.point.coords;
        let mut stencil = [Vector::zeros(n); 6];
        for (slot, off) in stencil.iter_mut().zip(STENCIL_OFFSETS) {
            *slot = curve.point(theta + off * spec.step)?;
        }

        let h = model.conformal_factor(&q);
        let nu = sample.chart_normal;
        let w = curve.plane.chart_normal_at(&q);
        let s = w.dot(&nu);
        if 1.0 - s * s < TANGENTIAL_LIMIT {
            report.skip("tangential");
            continue;
        }
        let witness = vec![q, nu, w];

        // Unnormalized projected normal, built as -(nu x w) x w.
        let nu_raw = -nu.cross(&w).cross(&w);
        let big_n = sample.normal;
        let omega = w * (1.0 / h);
        let g_nn = h * h * big_n.dot(&(nu_raw * (1.0 / h)));
        let g_wn = h * h * omega.dot(&big_n);
        report.checks.push(InequalityCheck::identity(
            CheckTag::ProjectionIdentity,
            g_nn,
            1.0 - g_wn * g_wn,
            witness.clone(),
        ));

        let nu_p = nu_raw.normalized().ok_or(Error::ZeroVector)?;
        let (d1, d2) = derivatives(&q, &stencil, spec.step);
        let kappa_cut = conformal_normal_curvature(&model, &q, &d1, &d2, &nu_p);
        let b = (1.0 - s * s).sqrt();
        let (k_lo, k_hi) = (sample.curvatures[0], sample.curvatures[sample.curvatures.len() - 1]);
        report
            .checks
            .push(InequalityCheck::inequality(CheckTag::CutCurvatureLower, k_lo / b, kappa_cut, witness.clone()));
        report
            .checks
            .push(InequalityCheck::inequality(CheckTag::CutCurvatureUpper, kappa_cut, k_hi / b, witness.clone()));

        shadow_check(&phi, &sample.point, &stencil, &nu, &w, spec.step, &mut report, witness)?;
    }
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
fn shadow_check(
    phi: &ChartIsometry,
    q: &ChartPoint,
    stencil: &[Vector; 6],
    nu: &Vector,
    w: &Vector,
    step: f64,
    report: &mut LemmaReport,
    witness: Vec<Vector>,
) -> Result<()> {
    let model = q.model;
    let n = model.dim;
    let qt = phi.apply_coords(&q.coords)?;
    let mut mapped = [Vector::zeros(n); 6];
    for (m, c) in mapped.iter_mut().zip(stencil) {
        *m = phi.apply_coords(c)?;
    }
    let unit_push = |v: &Vector| -> Result<Vector> { phi.push(&q.tangent(*v))?.comps.normalized().ok_or(Error::ZeroVector) };
    let nu_t = unit_push(nu)?;
    let w_t = unit_push(w)?;
    if w_t[n - 1].abs() < VERTICAL_LIMIT {
        report.skip("vertical_plane");
        return Ok(());
    }
    let nu_p = (nu_t - w_t * w_t.dot(&nu_t)).normalized().ok_or(Error::ZeroVector)?;
    let (d1, d2) = derivatives(&qt, &mapped, step);
    let shadow_speed = d1.truncated(n - 1).norm();
    if shadow_speed < SHADOW_SPEED_LIMIT * d1.norm() {
        report.skip("degenerate_shadow");
        return Ok(());
    }
    let kappa_cut = conformal_normal_curvature(&model, &qt, &d1, &d2, &nu_p);
    let kappa_shadow = (d1[0] * d2[1] - d1[1] * d2[0]).abs() / shadow_speed.powi(3);

    let h = model.conformal_factor(&qt);
    let grad_term = 4.0 * model.grad_log_factor(&qt).norm() / h;
    let slope = w_t[n - 1].abs();
    let tilt = nu_p[n - 1] * nu_p[n - 1] + slope * slope;
    let bound = h * slope * tilt.powf(-1.5) * (kappa_cut.abs() + grad_term);
    // Where the plane bends in the chart, the in-plane acceleration has a
    // component along the plane normal, `|d_w log h| / h^2` at unit metric
    // speed, which reaches the shadow through `nu' . e_n`.
    let bending = nu_p[n - 1].abs() * model.grad_log_factor(&qt).dot(&w_t).abs() * tilt.powf(-1.5);
    report.checks.push(InequalityCheck::inequality(
        CheckTag::ShadowCurvatureWithBending,
        kappa_shadow,
        bound + bending,
        witness.clone(),
    ));
    report
        .checks
        .push(InequalityCheck::inequality(CheckTag::ShadowCurvature, kappa_shadow, bound, witness));
    Ok(())
}

/// `nu . (-(nu x w) x w) = 1 - (w . nu)^2` on random unit pairs in `R^3`.
pub fn verify_cross_product_identity(seed: u64, count: usize) -> Vec<InequalityCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut unit = || loop {
        let v = Vector::from_fn(3, |_| rng.gen_range(-1.0..=1.0));
        let r = v.norm();
        if r > 1e-3 && r <= 1.0 {
            return v * (1.0 / r);
        }
    };
    (0..count)
        .map(|_| {
            let (nu, w) = (unit(), unit());
            let projected = -nu.cross(&w).cross(&w);
            let s = w.dot(&nu);
            InequalityCheck::identity(CheckTag::CrossProductIdentity, nu.dot(&projected), 1.0 - s * s, vec![nu, w])
        })
        .collect()
}
