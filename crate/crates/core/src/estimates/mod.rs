//! Margin checks for the intermediate quantitative lemmas.
//!
//! Every check is an [`InequalityCheck`] `lhs <= rhs` carrying the points it
//! was evaluated at. Checks come in three kinds:
//!
//! * identities, which must hold to [`IDENTITY_TOL`] in absolute value;
//! * constant-free inequalities, with margin at least `-`[`INEQUALITY_TOL`];
//! * inequalities with an empirically fitted constant. Their constant is the
//!   worst case over the samples, so their margins are non-negative by
//!   construction; what is tested is that refitting on a disjoint half of the
//!   samples moves the constant by less than [`STABILITY_LIMIT`].

mod metric;
mod normals;
mod projection;

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypersurface::{DirectionGrid, GridSpec, Harmonic, RadialSurface, SurfaceFamily};
use crate::linalg::Vector;
use crate::moving_planes::MovingPlanes;
use crate::spaceform::{ModelKind, SpaceForm};
use crate::tolerance::Tolerances;

pub use metric::{verify_metric_lemmas, MetricSampleSpec};
pub use normals::{verify_normal_stability, NormalStability, PairSpec, SurfaceGraph};
pub use projection::{
    verify_cap_boundary, verify_cross_product_identity, verify_projection_curvature, verify_projection_curvature_at,
    ChartAnchor, CutSpec,
};

pub const IDENTITY_TOL: f64 = 1e-8;
pub const INEQUALITY_TOL: f64 = 1e-6;
pub const STABILITY_LIMIT: f64 = 0.1;

/// Which inequality a check instantiates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckTag {
    /// `2/(1+R^2) |p - q| <= d(p, q)` in the spherical chart.
    SphereDistanceLower,
    /// `d(p, q) <= pi |p - q|` in the spherical chart.
    SphereDistanceUpper,
    /// `c |q - e_n| <= d(q, e_n)` in the half-space chart, fitted `c`.
    HyperbolicDistanceLower,
    /// `d(q, e_n) <= C |q - e_n|` in the half-space chart, fitted `C`.
    HyperbolicDistanceUpper,
    /// `|u(x) - u(0)| <= rho_1 - sqrt(rho_1^2 - |x|^2)` for the local graph.
    GraphHeight,
    /// `|grad u(x)| <= |x| / sqrt(rho_1^2 - |x|^2)`.
    GraphSlope,
    /// `c r^{n-1} <= Area(B_r(p))`, fitted `c`.
    BallArea,
    /// `|N_p - tau N_q|_p <= C d_S(p, q)`, fitted `C`.
    NormalDifference,
    /// `sqrt(1 - C^2 d_S^2) <= g_p(N_p, tau N_q)` with the fitted `C`.
    NormalInnerProduct,
    /// Fitted normal Lipschitz constant against `10 / rho`.
    NormalLipschitzHeuristic,
    /// `g(N, N') = 1 - g(omega, N)^2` for the unnormalized projected normal.
    ProjectionIdentity,
    /// `nu . (-(nu x w) x w) = 1 - (w . nu)^2` on random unit pairs.
    CrossProductIdentity,
    /// `k_1 / sqrt(1 - g(omega, N)^2) <= k'` for the cut curve.
    CutCurvatureLower,
    /// `k' <= k_{n-1} / sqrt(1 - g(omega, N)^2)`.
    CutCurvatureUpper,
    /// Curvature of the chart shadow of the cut curve against the bound in
    /// `h`, `grad F`, `nu' . e_n` and `k'`.
    ShadowCurvature,
    /// The same bound plus the contribution of the plane's own bending in
    /// the chart.
    ShadowCurvatureWithBending,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Identity,
    ConstantFree,
    Fitted,
}

impl CheckTag {
    pub fn kind(self) -> CheckKind {
        use CheckTag::*;
        match self {
            ProjectionIdentity | CrossProductIdentity => CheckKind::Identity,
            SphereDistanceLower | SphereDistanceUpper | GraphHeight | GraphSlope | CutCurvatureLower
            | CutCurvatureUpper | ShadowCurvature | ShadowCurvatureWithBending => CheckKind::ConstantFree,
            HyperbolicDistanceLower | HyperbolicDistanceUpper | BallArea | NormalDifference
            | NormalInnerProduct | NormalLipschitzHeuristic => CheckKind::Fitted,
        }
    }

    pub fn name(self) -> String {
        serde_json::to_value(self)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default()
    }
}

impl CheckKind {
    /// Most negative margin a passing check may have.
    pub fn tolerance(self) -> f64 {
        match self {
            CheckKind::Identity => IDENTITY_TOL,
            CheckKind::ConstantFree => INEQUALITY_TOL,
            CheckKind::Fitted => 0.0,
        }
    }
}

/// One evaluated instance of `lhs <= rhs` (or `lhs == rhs`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub tag: CheckTag,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`; for identities `-|rhs - lhs|`.
    pub margin: f64,
    /// The points and directions the check was evaluated at, in chart
    /// coordinates.
    pub witness: Vec<Vector>,
}

impl InequalityCheck {
    pub fn inequality(tag: CheckTag, lhs: f64, rhs: f64, witness: Vec<Vector>) -> Self {
        Self {
            tag,
            lhs,
            rhs,
            margin: rhs - lhs,
            witness,
        }
    }

    pub fn identity(tag: CheckTag, lhs: f64, rhs: f64, witness: Vec<Vector>) -> Self {
        Self {
            tag,
            lhs,
            rhs,
            margin: -(rhs - lhs).abs(),
            witness,
        }
    }

    /// NaN margins fail.
    pub fn passed(&self) -> bool {
        self.margin >= -self.tag.kind().tolerance()
    }
}

/// A constant fitted as the worst case over samples, refitted on two
/// disjoint halves of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedConstant {
    pub name: String,
    pub value: f64,
    pub first_half: f64,
    pub second_half: f64,
    pub relative_change: f64,
    pub stable: bool,
}

impl FittedConstant {
    pub fn from_halves(name: impl Into<String>, value: f64, first_half: f64, second_half: f64) -> Self {
        let scale = first_half.abs().max(second_half.abs());
        let relative_change = if scale > 0.0 {
            (first_half - second_half).abs() / scale
        } else {
            0.0
        };
        Self {
            name: name.into(),
            value,
            first_half,
            second_half,
            relative_change,
            stable: relative_change < STABILITY_LIMIT,
        }
    }

    /// Largest of `values`, refitted on even and odd positions.
    pub fn max_of(name: impl Into<String>, values: &[f64]) -> Self {
        let fold = |it: &mut dyn Iterator<Item = f64>| it.fold(f64::NEG_INFINITY, f64::max);
        Self::from_halves(
            name,
            fold(&mut values.iter().copied()),
            fold(&mut values.iter().copied().step_by(2)),
            fold(&mut values.iter().copied().skip(1).step_by(2)),
        )
    }

    /// Smallest of `values`, refitted on even and odd positions.
    pub fn min_of(name: impl Into<String>, values: &[f64]) -> Self {
        let fold = |it: &mut dyn Iterator<Item = f64>| it.fold(f64::INFINITY, f64::min);
        Self::from_halves(
            name,
            fold(&mut values.iter().copied()),
            fold(&mut values.iter().copied().step_by(2)),
            fold(&mut values.iter().copied().skip(1).step_by(2)),
        )
    }
}

/// Checks, fitted constants and skip counters from one or more verifiers.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub checks: Vec<InequalityCheck>,
    pub constants: Vec<FittedConstant>,
    /// Samples left out, by reason.
    pub skipped: BTreeMap<String, usize>,
}

/// Per-tag aggregate for the summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TagSummary {
    pub tag: CheckTag,
    pub kind: CheckKind,
    pub count: usize,
    pub failures: usize,
    pub min_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaSummary {
    pub seed: u64,
    pub checks: usize,
    pub failures: usize,
    pub passed: bool,
    pub tags: Vec<TagSummary>,
    pub constants: Vec<FittedConstant>,
    pub skipped: BTreeMap<String, usize>,
}

impl LemmaReport {
    pub fn skip(&mut self, reason: &str) {
        *self.skipped.entry(reason.to_owned()).or_default() += 1;
    }

    pub fn extend(&mut self, other: LemmaReport) {
        self.checks.extend(other.checks);
        self.constants.extend(other.constants);
        for (k, v) in other.skipped {
            *self.skipped.entry(k).or_default() += v;
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &InequalityCheck> {
        self.checks.iter().filter(|c| !c.passed())
    }

    pub fn passed(&self) -> bool {
        self.failures().next().is_none() && self.constants.iter().all(|c| c.stable)
    }

    /// Smallest margin among checks of the given kind.
    pub fn min_margin(&self, kind: CheckKind) -> Option<f64> {
        self.checks
            .iter()
            .filter(|c| c.tag.kind() == kind)
            .map(|c| c.margin)
            .reduce(f64::min)
    }

    pub fn count(&self, tag: CheckTag) -> usize {
        self.checks.iter().filter(|c| c.tag == tag).count()
    }

    pub fn summary(&self, seed: u64) -> LemmaSummary {
        let mut tags: BTreeMap<CheckTag, TagSummary> = BTreeMap::new();
        for c in &self.checks {
            let entry = tags.entry(c.tag).or_insert(TagSummary {
                tag: c.tag,
                kind: c.tag.kind(),
                count: 0,
                failures: 0,
                min_margin: f64::INFINITY,
            });
            entry.count += 1;
            entry.failures += usize::from(!c.passed());
            entry.min_margin = entry.min_margin.min(c.margin);
        }
        LemmaSummary {
            seed,
            checks: self.checks.len(),
            failures: self.failures().count(),
            passed: self.passed(),
            tags: tags.into_values().collect(),
            constants: self.constants.clone(),
            skipped: self.skipped.clone(),
        }
    }

    /// CSV with columns `tag,lhs,rhs,margin,witness`. Witness coordinates use
    /// the shortest round-trip representation so rows replay exactly.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let io = |e: csv::Error| Error::InvalidArgument(format!("csv output: {e}"));
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["tag", "lhs", "rhs", "margin", "witness"]).map_err(io)?;
        for c in &self.checks {
            let witness = c
                .witness
                .iter()
                .map(|v| v.as_slice().iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" "))
                .collect::<Vec<_>>()
                .join(";");
            w.write_record([
                c.tag.name(),
                format!("{:.11e}", c.lhs),
                format!("{:.11e}", c.rhs),
                format!("{:.11e}", c.margin),
                witness,
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::InvalidArgument(format!("csv output: {e}")))?;
        Ok(())
    }
}

/// `rho_1` for a touching-ball radius `rho`: the Euclidean touching radius
/// guaranteed for the surface seen through an origin chart.
pub fn rho_one(kind: ModelKind, rho: f64) -> f64 {
    match kind {
        ModelKind::Euclidean => rho,
        ModelKind::Hyperbolic => {
            let a = (-rho).exp() * rho.sinh();
            (1.0 - a) * a
        }
        ModelKind::Spherical => rho / std::f64::consts::PI,
    }
}

/// Settings for [`run_lemma_suite`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LemmaSuiteConfig {
    pub seed: u64,
    pub dim: usize,
    pub grid_level: usize,
    pub metric: MetricSampleSpec,
    pub pairs: PairSpec,
    pub cut: CutSpec,
    pub cross_product_pairs: usize,
    pub tolerances: Tolerances,
}

impl Default for LemmaSuiteConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            dim: 3,
            grid_level: 4,
            metric: MetricSampleSpec::default(),
            pairs: PairSpec::default(),
            cut: CutSpec::default(),
            cross_product_pairs: 1000,
            tolerances: Tolerances::default(),
        }
    }
}

/// The surfaces the suite runs on: a geodesic sphere and a perturbed sphere
/// per model.
pub fn suite_surfaces(dim: usize) -> Result<Vec<RadialSurface>> {
    let mut out = Vec::new();
    for model in [SpaceForm::euclidean(dim), SpaceForm::hyperbolic(dim), SpaceForm::spherical(dim)] {
        out.push(RadialSurface::centered(model, SurfaceFamily::GeodesicSphere { radius: 0.8 })?);
        out.push(RadialSurface::centered(
            model,
            SurfaceFamily::PerturbedSphere {
                radius: 0.8,
                eps: 0.1,
                harmonic: Harmonic::Xy,
            },
        )?);
    }
    Ok(out)
}

/// Runs every verifier on the suite surfaces.
pub fn run_lemma_suite(config: &LemmaSuiteConfig) -> Result<LemmaReport> {
    run_lemma_checks(&suite_surfaces(config.dim)?, config)
}

/// Runs every verifier on `surfaces`, which must have dimension
/// `config.dim`.
///
/// The model-level distance checks run once, with the first surface.
/// Cut-curve checks use planes through the chart origin and at a quarter
/// of the unit distance along a few fixed directions, plus the critical
/// plane of the moving-plane procedure along `e_1`.
pub fn run_lemma_checks(surfaces: &[RadialSurface], config: &LemmaSuiteConfig) -> Result<LemmaReport> {
    if let Some(s) = surfaces.iter().find(|s| s.dim() != config.dim) {
        return Err(Error::InvalidArgument(format!(
            "lemma checks configured for n = {}, got a surface with n = {}",
            config.dim,
            s.dim()
        )));
    }
    let grid = DirectionGrid::new(GridSpec::new(config.dim, config.grid_level))?;
    let mut report = LemmaReport::default();
    report.checks.extend(verify_cross_product_identity(config.seed, config.cross_product_pairs));
    for (k, surface) in surfaces.iter().enumerate() {
        let sampled = surface.sample(&grid)?;
        let seed = config.seed.wrapping_add(k as u64 * 1_000_003);
        let metric = MetricSampleSpec {
            seed,
            // The model-level distance checks do not depend on the surface.
            pairs: if k == 0 { config.metric.pairs } else { 0 },
            ..config.metric.clone()
        };
        report.extend(verify_metric_lemmas(&metric, surface, &sampled)?);
        let pairs = PairSpec { seed, ..config.pairs.clone() };
        report.extend(verify_normal_stability(surface, &sampled, &pairs)?.report);
        if config.dim == 3 {
            let model = surface.model;
            let o = model.origin();
            for dir in [[1.0, 0.0, 0.0], [0.0, 0.6, 0.8], [0.48, 0.6, 0.64]] {
                let v = o.tangent(Vector::from_slice(&dir));
                for s in [0.0, 0.25] {
                    let plane = model.make_hyperplane(&v, s)?;
                    match verify_projection_curvature(surface, &plane, &config.cut) {
                        Ok(cut) => report.extend(cut),
                        Err(Error::NoIntersection) => report.skip("plane_misses_surface"),
                        Err(e) => return Err(e),
                    }
                }
            }
            let mp = MovingPlanes::from_sampled(surface, &sampled, &config.tolerances);
            let cap = mp.critical_cap(&Vector::basis(3, 0))?;
            report.extend(verify_cap_boundary(&mp, &cap, &config.cut)?);
        }
    }
    Ok(report)
}
