//! Stability of the inward normal under parallel transport, with the
//! intrinsic distance replaced by shortest paths on the sample grid.

use petgraph::algo::dijkstra;
use petgraph::graph::{NodeIndex, UnGraph};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{rho_one, CheckTag, FittedConstant, InequalityCheck, LemmaReport};
use crate::error::{Error, Result};
use crate::hypersurface::{RadialSurface, SampledSurface};
use crate::linalg::Vector;
use crate::spaceform::SpaceForm;

/// Sample grid as a weighted graph: edge weights are model distances between
/// neighbouring samples, so path lengths bound the intrinsic distance from
/// above; each node also carries the metric area of its direction cell.
#[derive(Debug, Clone)]
pub struct SurfaceGraph {
    graph: UnGraph<(), f64>,
    points: Vec<Vector>,
    areas: Vec<f64>,
    spacing: Vec<f64>,
}

impl SurfaceGraph {
    pub fn new(model: SpaceForm, sampled: &SampledSurface) -> Self {
        let len = sampled.len();
        let points: Vec<Vector> = sampled.samples.iter().map(|s| s.point.coords).collect();
        let mut graph = UnGraph::with_capacity(len, 3 * len);
        for _ in 0..len {
            graph.add_node(());
        }
        let mut spacing = vec![0.0; len];
        let mut degree = vec![0usize; len];
        for (i, j) in sampled.grid.edges() {
            let w = model.chart_distance(&points[i], &points[j]);
            graph.add_edge(NodeIndex::new(i), NodeIndex::new(j), w);
            for k in [i, j] {
                spacing[k] += w;
                degree[k] += 1;
            }
        }
        for (s, d) in spacing.iter_mut().zip(&degree) {
            *s /= (*d).max(1) as f64;
        }
        let areas = sampled
            .samples
            .iter()
            .zip(&sampled.grid.cell_measure)
            .map(|(s, m)| s.area_density * m)
            .collect();
        Self {
            graph,
            points,
            areas,
            spacing,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> Vector {
        self.points[i]
    }

    /// Neighbouring node pairs `(i, j)`, `i < j`, with their edge length.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.graph.edge_indices().map(|e| {
            let (a, b) = self.graph.edge_endpoints(e).expect("edge exists");
            let (i, j) = (a.index().min(b.index()), a.index().max(b.index()));
            (i, j, self.graph[e])
        })
    }

    /// Shortest-path lengths from `source` to every node.
    pub fn distances_from(&self, source: usize) -> Vec<f64> {
        let map = dijkstra(&self.graph, NodeIndex::new(source), None, |e| *e.weight());
        let mut out = vec![f64::INFINITY; self.len()];
        for (node, d) in map {
            out[node.index()] = d;
        }
        out
    }

    /// Area of `{d < r}` for a distance field from [`Self::distances_from`].
    /// Each node's cell counts with a linear ramp across one local grid
    /// spacing, which removes most of the staircase error of a hard cutoff.
    pub fn ball_area(&self, dist: &[f64], r: f64) -> f64 {
        dist.iter()
            .zip(&self.areas)
            .zip(&self.spacing)
            .map(|((d, a), h)| a * ((r - d) / h + 0.5).clamp(0.0, 1.0))
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PairSpec {
    pub seed: u64,
    /// Sources for long-range pairs (beyond grid neighbours).
    pub sources: usize,
    /// Long-range targets kept per source.
    pub targets_per_source: usize,
}

impl Default for PairSpec {
    fn default() -> Self {
        Self {
            seed: 0,
            sources: 24,
            targets_per_source: 24,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalStability {
    /// Touching-ball radius of the sampled surface.
    pub rho: f64,
    /// Pair distance limit `rho_1 / 2`.
    pub delta0: f64,
    /// `max |N_p - tau N_q|_p / d_S(p, q)` over the pairs.
    pub lipschitz: f64,
    pub pairs: usize,
    pub report: LemmaReport,
}

/// Normal stability over every neighbouring pair of samples plus random
/// longer pairs, all with `0 < d_S <= rho_1 / 2`.
///
/// Neighbour pairs have `d_S` equal to their model distance, which is where
/// the largest quotients occur on round pieces.
pub fn verify_normal_stability(surface: &RadialSurface, sampled: &SampledSurface, spec: &PairSpec) -> Result<NormalStability> {
    let model = surface.model;
    let rho = sampled.touching_ball_radius(surface)?;
    let delta0 = 0.5 * rho_one(model.kind, rho);
    let graph = SurfaceGraph::new(model, sampled);
    let mut pairs: Vec<(usize, usize, f64)> = graph.edges().filter(|e| e.2 > 0.0 && e.2 <= delta0).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut sources: Vec<usize> = (0..graph.len()).collect();
    sources.shuffle(&mut rng);
    sources.truncate(spec.sources);
    for &p in &sources {
        let dist = graph.distances_from(p);
        let near = &sampled.grid.neighbors[p];
        let mut far: Vec<usize> = (0..graph.len())
            .filter(|&q| q != p && dist[q] > 0.0 && dist[q] <= delta0 && !near.contains(&q))
            .collect();
        far.shuffle(&mut rng);
        far.truncate(spec.targets_per_source);
        far.sort_unstable();
        pairs.extend(far.into_iter().map(|q| (p, q, dist[q])));
    }
    if pairs.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "no sample pairs within the validity distance {delta0:e}; refine the grid"
        )));
    }

    let measured: Vec<(f64, f64)> = pairs
        .iter()
        .map(|&(i, j, d)| {
            let (p, q) = (&sampled.samples[i], &sampled.samples[j]);
            let moved = model.transport_raw(&q.point.coords, &p.point.coords, &q.normal);
            let h = p.point.conformal_factor();
            let gap = h * (p.normal - moved).norm();
            let inner = h * h * p.normal.dot(&moved);
            (gap / d, inner)
        })
        .collect();
    let ratios: Vec<f64> = measured.iter().map(|m| m.0).collect();
    let fit = FittedConstant::max_of("normal_lipschitz", &ratios);
    let c = fit.value;

    let mut report = LemmaReport::default();
    for (&(i, j, d), &(ratio, inner)) in pairs.iter().zip(&measured) {
        let witness = vec![sampled.samples[i].point.coords, sampled.samples[j].point.coords];
        report
            .checks
            .push(InequalityCheck::inequality(CheckTag::NormalDifference, ratio, c, witness.clone()));
        let floor = (1.0 - c * c * d * d).max(0.0).sqrt();
        report
            .checks
            .push(InequalityCheck::inequality(CheckTag::NormalInnerProduct, floor, inner, witness));
    }
    report.checks.push(InequalityCheck::inequality(
        CheckTag::NormalLipschitzHeuristic,
        c,
        10.0 / rho,
        vec![surface.base.coords],
    ));
    report.constants.push(fit);
    Ok(NormalStability {
        rho,
        delta0,
        lipschitz: c,
        pairs: pairs.len(),
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypersurface::{DirectionGrid, GridSpec, SurfaceFamily};

    #[test]
    fn ball_area_on_unit_sphere() {
        let s = RadialSurface::centered(SpaceForm::euclidean(3), SurfaceFamily::GeodesicSphere { radius: 1.0 }).unwrap();
        let sampled = s.sample(&DirectionGrid::new(GridSpec::new(3, 4)).unwrap()).unwrap();
        let g = SurfaceGraph::new(s.model, &sampled);
        let total: f64 = g.ball_area(&g.distances_from(0), 10.0);
        assert!((total - 4.0 * std::f64::consts::PI).abs() < 1e-6, "{total}");
        // Graph paths overestimate geodesic length by at most the lattice
        // detour factor, so the measured cap sits between the exact cap and
        // the cap of radius r / 1.16.
        let r: f64 = 0.4;
        let area = g.ball_area(&g.distances_from(0), r);
        let cap = |t: f64| 2.0 * std::f64::consts::PI * (1.0 - t.cos());
        assert!(area <= cap(r) * 1.01 && area >= cap(r / 1.16), "{area} vs {}", cap(r));
    }

    #[test]
    fn coincident_points_have_unit_inner_product() {
        let s = RadialSurface::centered(SpaceForm::hyperbolic(3), SurfaceFamily::GeodesicSphere { radius: 0.5 }).unwrap();
        let sample = s.principal_curvatures(&Vector::basis(3, 1)).unwrap();
        let x = sample.point.coords;
        let moved = s.model.transport_raw(&x, &x, &sample.normal);
        let h = sample.point.conformal_factor();
        assert!((h * h * sample.normal.dot(&moved) - 1.0).abs() < 1e-14);
        assert!(h * (sample.normal - moved).norm() < 1e-14);
    }
}
