//! Local equivalence of chart and metric distances, the local graph bounds
//! and the lower area bound for small intrinsic balls.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::normals::SurfaceGraph;
use super::{rho_one, CheckTag, FittedConstant, InequalityCheck, LemmaReport};
use crate::error::{Error, Result};
use crate::hypersurface::{RadialSurface, SampledSurface};
use crate::linalg::Vector;
use crate::spaceform::SpaceForm;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricSampleSpec {
    pub seed: u64,
    /// Random pairs for the spherical distance bounds and random points for
    /// the hyperbolic ones.
    pub pairs: usize,
    /// Chart radius `R` bounding the spherical sample points.
    pub radius_bound: f64,
    /// Geodesic radius about `e_n` for the hyperbolic samples.
    pub hyperbolic_radius: f64,
    /// Centers at which the local graph is examined.
    pub graph_centers: usize,
    /// Graph samples kept per center.
    pub graph_samples: usize,
    /// Graph samples are taken with `|x| <= graph_fraction * rho_1`.
    pub graph_fraction: f64,
    /// Centers for the ball-area bound.
    pub area_centers: usize,
}

impl Default for MetricSampleSpec {
    fn default() -> Self {
        Self {
            seed: 0,
            pairs: 10_000,
            radius_bound: 1.0,
            hyperbolic_radius: 1.0,
            graph_centers: 24,
            graph_samples: 48,
            graph_fraction: 0.9,
            area_centers: 24,
        }
    }
}

impl MetricSampleSpec {
    fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidArgument(format!("{what} is outside its sampling domain")));
        if !(self.radius_bound > 0.0 && self.radius_bound.is_finite()) {
            return bad("radius_bound");
        }
        if !(self.hyperbolic_radius > 0.0 && self.hyperbolic_radius.is_finite()) {
            return bad("hyperbolic_radius");
        }
        if !(self.graph_fraction > 0.0 && self.graph_fraction < 1.0) {
            return bad("graph_fraction");
        }
        Ok(())
    }
}

/// Uniform point of the closed Euclidean ball of radius `r` in `R^n`.
fn ball_point(rng: &mut impl Rng, n: usize, r: f64) -> Vector {
    loop {
        let v = Vector::from_fn(n, |_| rng.gen_range(-1.0..=1.0));
        if v.norm_squared() <= 1.0 {
            return v * r;
        }
    }
}

fn unit_vector(rng: &mut impl Rng, n: usize) -> Vector {
    loop {
        if let Some(u) = ball_point(rng, n, 1.0).normalized() {
            return u;
        }
    }
}

/// Distance equivalences, local graph bounds and the small-ball area bound.
///
/// The distance checks sample their own model in the surface's dimension;
/// `spec.pairs = 0` leaves them out. The graph and area checks run on the
/// surface, with `rho` its sampled touching-ball radius.
pub fn verify_metric_lemmas(spec: &MetricSampleSpec, surface: &RadialSurface, sampled: &SampledSurface) -> Result<LemmaReport> {
    spec.validate()?;
    let n = surface.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut report = LemmaReport::default();
    if spec.pairs > 0 {
        sphere_distance_checks(spec, n, &mut rng, &mut report);
        hyperbolic_distance_checks(spec, n, &mut rng, &mut report)?;
    }
    let rho = sampled.touching_ball_radius(surface)?;
    let rho1 = rho_one(surface.model.kind, rho);
    graph_checks(spec, surface, sampled, rho1, &mut rng, &mut report)?;
    let graph = SurfaceGraph::new(surface.model, sampled);
    area_checks(spec, n, &graph, rho1, &mut rng, &mut report);
    Ok(report)
}

fn sphere_distance_checks(spec: &MetricSampleSpec, n: usize, rng: &mut impl Rng, report: &mut LemmaReport) {
    let model = SpaceForm::spherical(n).with_hemisphere(false);
    let r = spec.radius_bound;
    let lower = 2.0 / (1.0 + r * r);
    for _ in 0..spec.pairs {
        let p = ball_point(rng, n, r);
        let q = ball_point(rng, n, r);
        let gap = (p - q).norm();
        let d = model.chart_distance(&p, &q);
        report.checks.push(InequalityCheck::inequality(CheckTag::SphereDistanceLower, lower * gap, d, vec![p, q]));
        report.checks.push(InequalityCheck::inequality(
            CheckTag::SphereDistanceUpper,
            d,
            std::f64::consts::PI * gap,
            vec![p, q],
        ));
    }
}

fn hyperbolic_distance_checks(spec: &MetricSampleSpec, n: usize, rng: &mut impl Rng, report: &mut LemmaReport) -> Result<()> {
    let model = SpaceForm::hyperbolic(n);
    let e_n = model.origin().coords;
    let mut samples = Vec::with_capacity(spec.pairs);
    while samples.len() < spec.pairs {
        let t = spec.hyperbolic_radius * rng.gen::<f64>();
        let q = model.exp_raw(&e_n, &(unit_vector(rng, n) * t));
        let gap = (q - e_n).norm();
        if gap == 0.0 {
            continue;
        }
        let d = model.chart_distance(&q, &e_n);
        if d >= spec.hyperbolic_radius {
            continue;
        }
        samples.push((q, d / gap));
    }
    let ratios: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let c = FittedConstant::min_of("hyperbolic_distance_lower", &ratios);
    let big_c = FittedConstant::max_of("hyperbolic_distance_upper", &ratios);
    for (q, ratio) in &samples {
        report
            .checks
            .push(InequalityCheck::inequality(CheckTag::HyperbolicDistanceLower, c.value, *ratio, vec![*q]));
        report
            .checks
            .push(InequalityCheck::inequality(CheckTag::HyperbolicDistanceUpper, *ratio, big_c.value, vec![*q]));
    }
    report.constants.push(c);
    report.constants.push(big_c);
    Ok(())
}

/// Graph bounds in the origin chart of randomly chosen surface samples.
///
/// The graph sheet over `B_{rho_1}` is the set of samples reached from the
/// center through grid neighbours whose chart image projects into the
/// (shrunken) ball and whose mapped inward normal points up.
fn graph_checks(
    spec: &MetricSampleSpec,
    surface: &RadialSurface,
    sampled: &SampledSurface,
    rho1: f64,
    rng: &mut impl Rng,
    report: &mut LemmaReport,
) -> Result<()> {
    let model = surface.model;
    let n = model.dim;
    let o = model.origin().coords;
    let reach = spec.graph_fraction * rho1;
    let mut centers: Vec<usize> = (0..sampled.len()).collect();
    centers.shuffle(rng);
    centers.truncate(spec.graph_centers);
    for &c in &centers {
        let center = &sampled.samples[c];
        let phi = model.origin_chart_with_normal(&center.point, &center.point.tangent(center.normal))?;
        let mut images: Vec<Option<(Vector, Vector)>> = vec![None; sampled.len()];
        let mut image = |j: usize| -> Result<Option<(Vector, Vector)>> {
            if let Some(done) = images[j] {
                return Ok(Some(done));
            }
            let s = &sampled.samples[j];
            let y = phi.apply_coords(&s.point.coords)?;
            let nu = phi.push(&s.point.tangent(s.normal))?.comps.normalized().ok_or(Error::ZeroVector)?;
            let x = y.truncated(n - 1);
            if x.norm() > reach || nu[n - 1] <= 0.0 {
                return Ok(None);
            }
            images[j] = Some((y, nu));
            Ok(Some((y, nu)))
        };
        let mut seen = vec![false; sampled.len()];
        let mut sheet = Vec::new();
        let mut queue = VecDeque::from([c]);
        seen[c] = true;
        while let Some(i) = queue.pop_front() {
            let Some((y, nu)) = image(i)? else { continue };
            sheet.push((i, y, nu));
            for &j in &sampled.grid.neighbors[i] {
                if !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        sheet.shuffle(rng);
        sheet.truncate(spec.graph_samples);
        sheet.sort_by_key(|s| s.0);
        for (j, y, nu) in sheet {
            let x = y.truncated(n - 1).norm();
            let room = (rho1 * rho1 - x * x).sqrt();
            let witness = vec![center.point.coords, sampled.samples[j].point.coords];
            report.checks.push(InequalityCheck::inequality(
                CheckTag::GraphHeight,
                (y[n - 1] - o[n - 1]).abs(),
                rho1 - room,
                witness.clone(),
            ));
            let slope = nu.truncated(n - 1).norm() / nu[n - 1];
            report
                .checks
                .push(InequalityCheck::inequality(CheckTag::GraphSlope, slope, x / room, witness));
        }
    }
    Ok(())
}

/// `Area(B_r(p)) / r^{n-1}` at random centers for `r` in
/// `{1/2, 3/4, 1} * min(1, 1/rho_1) / 2`, fitted from below.
fn area_checks(
    spec: &MetricSampleSpec,
    n: usize,
    graph: &SurfaceGraph,
    rho1: f64,
    rng: &mut impl Rng,
    report: &mut LemmaReport,
) {
    let r_max = 0.5 * 1f64.min(1.0 / rho1);
    let mut centers: Vec<usize> = (0..graph.len()).collect();
    centers.shuffle(rng);
    centers.truncate(spec.area_centers);
    let mut samples = Vec::new();
    for &c in &centers {
        let dist = graph.distances_from(c);
        for f in [0.5, 0.75, 1.0] {
            let r = f * r_max;
            let ratio = graph.ball_area(&dist, r) / r.powi(n as i32 - 1);
            samples.push((c, r, ratio));
        }
    }
    let ratios: Vec<f64> = samples.iter().map(|s| s.2).collect();
    let fit = FittedConstant::min_of("ball_area", &ratios);
    for (c, r, ratio) in samples {
        report.checks.push(InequalityCheck::inequality(
            CheckTag::BallArea,
            fit.value,
            ratio,
            vec![graph.point(c), Vector::from_slice(&[r])],
        ));
    }
    report.constants.push(fit);
}
