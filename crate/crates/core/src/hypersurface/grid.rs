//! Deterministic direction grids on the unit sphere `S^{n-1}` of a tangent
//! space, for `n = 2` and `n = 3`.
//!
//! A grid carries two point sets: sample directions with a neighbour graph
//! (used for extrema, connected components and difference quotients) and a
//! product quadrature rule (used for integrals). Both are invariant under the
//! coordinate reflections `u_i -> -u_i` and, in three dimensions, under the
//! swap `u_1 <-> u_2`.

use std::collections::HashMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::optimize::gauss_legendre;

/// Default refinement level: 10 242 icosphere vertices, or 2 000 angles.
pub const DEFAULT_LEVEL: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dim: usize,
    pub level: usize,
}

impl GridSpec {
    pub fn new(dim: usize, level: usize) -> Self {
        Self { dim, level }
    }

    /// The same grid kind at twice the resolution.
    pub fn refined(&self) -> Self {
        Self {
            dim: self.dim,
            level: self.level + 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DirectionGrid {
    pub spec: GridSpec,
    pub directions: Vec<Vector>,
    /// Sorted neighbour lists, one per direction.
    pub neighbors: Vec<Vec<usize>>,
    pub quadrature: Vec<(Vector, f64)>,
    /// Measure of the direction cell owned by each node (a third of the
    /// adjacent spherical triangles, or half the adjacent arcs); sums to the
    /// measure of the direction sphere.
    pub cell_measure: Vec<f64>,
}

impl DirectionGrid {
    pub fn new(spec: GridSpec) -> Result<Self> {
        match spec.dim {
            2 => Ok(Self::circle(spec)),
            3 => Ok(Self::icosphere(spec)),
            n => Err(Error::InvalidArgument(format!("direction grids exist for n = 2 and n = 3, not {n}"))),
        }
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    /// Undirected edges `(i, j)` with `i < j`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.neighbors
            .iter()
            .enumerate()
            .flat_map(|(i, list)| list.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
    }

    /// Number of angles on the circle for a level: 2000 at the default level.
    fn circle_count(level: usize) -> usize {
        let base = 2000.0 * 2f64.powi(level as i32 - DEFAULT_LEVEL as i32);
        ((base / 4.0).round() as usize).max(2) * 4
    }

    fn circle(spec: GridSpec) -> Self {
        let m = Self::circle_count(spec.level);
        let step = 2.0 * PI / m as f64;
        let directions: Vec<Vector> = (0..m)
            .map(|k| {
                let a = (k as f64 + 0.5) * step;
                Vector::from_slice(&[a.cos(), a.sin()])
            })
            .collect();
        let neighbors = (0..m)
            .map(|k| {
                let mut list = vec![(k + m - 1) % m, (k + 1) % m];
                list.sort_unstable();
                list
            })
            .collect();
        let quadrature = directions.iter().map(|d| (*d, step)).collect();
        Self {
            spec,
            cell_measure: vec![step; m],
            directions,
            neighbors,
            quadrature,
        }
    }

    fn icosphere(spec: GridSpec) -> Self {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let mut verts: Vec<Vector> = Vec::new();
        for &(a, b) in &[(-1.0, phi), (1.0, phi), (-1.0, -phi), (1.0, -phi)] {
            verts.push(Vector::from_slice(&[0.0, a, b]));
        }
        for &(a, b) in &[(-1.0, phi), (1.0, phi), (-1.0, -phi), (1.0, -phi)] {
            verts.push(Vector::from_slice(&[a, b, 0.0]));
        }
        for &(a, b) in &[(-1.0, phi), (1.0, phi), (-1.0, -phi), (1.0, -phi)] {
            verts.push(Vector::from_slice(&[b, 0.0, a]));
        }
        let mut verts: Vec<Vector> = verts.iter().map(|v| v.normalized().expect("nonzero")).collect();

        // Faces: every triple of mutually adjacent vertices (edge length 2
        // before normalization), found by brute force on 12 vertices.
        let edge = |i: usize, j: usize| (verts[i].distance(&verts[j]) - 1.0514622242382672).abs() < 1e-9;
        let mut faces = Vec::new();
        for i in 0..12 {
            for j in i + 1..12 {
                for k in j + 1..12 {
                    if edge(i, j) && edge(j, k) && edge(i, k) {
                        faces.push([i, j, k]);
                    }
                }
            }
        }
        debug_assert_eq!(faces.len(), 20);

        for _ in 0..spec.level {
            let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
            let mut next = Vec::with_capacity(faces.len() * 4);
            for f in &faces {
                let mut mid = [0usize; 3];
                for e in 0..3 {
                    let (a, b) = (f[e], f[(e + 1) % 3]);
                    let key = (a.min(b), a.max(b));
                    mid[e] = *midpoint.entry(key).or_insert_with(|| {
                        verts.push((verts[a] + verts[b]).normalized().expect("nonzero"));
                        verts.len() - 1
                    });
                }
                next.push([f[0], mid[0], mid[2]]);
                next.push([f[1], mid[1], mid[0]]);
                next.push([f[2], mid[2], mid[1]]);
                next.push([mid[0], mid[1], mid[2]]);
            }
            faces = next;
        }

        let mut neighbors = vec![Vec::new(); verts.len()];
        for f in &faces {
            for e in 0..3 {
                let (a, b) = (f[e], f[(e + 1) % 3]);
                neighbors[a].push(b);
                neighbors[b].push(a);
            }
        }
        for list in &mut neighbors {
            list.sort_unstable();
            list.dedup();
        }

        let mut cell_measure = vec![0.0; verts.len()];
        for f in &faces {
            let (a, b, c) = (verts[f[0]], verts[f[1]], verts[f[2]]);
            // Van Oosterom–Strackee solid angle.
            let num = a.dot(&b.cross(&c)).abs();
            let den = 1.0 + a.dot(&b) + b.dot(&c) + c.dot(&a);
            let area = 2.0 * num.atan2(den);
            for &v in f {
                cell_measure[v] += area / 3.0;
            }
        }

        Self {
            spec,
            directions: verts,
            neighbors,
            quadrature: Self::sphere_quadrature(spec.level),
            cell_measure,
        }
    }

    /// Gauss–Legendre in `u_3 = cos(theta)` times the midpoint rule in the
    /// azimuth, 64 x 128 nodes at the default level.
    fn sphere_quadrature(level: usize) -> Vec<(Vector, f64)> {
        let n_theta = ((64.0 * 2f64.powi(level as i32 - DEFAULT_LEVEL as i32)).round() as usize).max(4);
        let n_phi = 2 * n_theta;
        let (nodes, weights) = gauss_legendre(n_theta);
        let dphi = 2.0 * PI / n_phi as f64;
        let mut out = Vec::with_capacity(n_theta * n_phi);
        for (z, w) in nodes.iter().zip(&weights) {
            let s = (1.0 - z * z).sqrt();
            for j in 0..n_phi {
                let a = (j as f64 + 0.5) * dphi;
                out.push((Vector::from_slice(&[s * a.cos(), s * a.sin(), *z]), w * dphi));
            }
        }
        out
    }
}

/// An orthonormal basis of the orthogonal complement of a unit vector `u`,
/// built from the coordinate axes least aligned with `u`.
pub fn tangent_basis(u: &Vector) -> Vec<Vector> {
    let n = u.len();
    let mut axes: Vec<usize> = (0..n).collect();
    axes.sort_by(|&a, &b| u[a].abs().total_cmp(&u[b].abs()));
    let mut basis: Vec<Vector> = Vec::with_capacity(n - 1);
    for &a in axes.iter().take(n - 1) {
        let mut w = Vector::basis(n, a);
        w = w.axpy(-w.dot(u), u);
        for b in &basis {
            w = w.axpy(-w.dot(b), b);
        }
        basis.push(w.normalized().expect("axis not parallel to u"));
    }
    basis
}

/// Exponential map of the unit sphere at `u0`: the direction reached by
/// leaving `u0` along `sum a_i basis_i`.
pub fn direction_chart(u0: &Vector, basis: &[Vector], a: &[f64]) -> Vector {
    let mut w = Vector::zeros(u0.len());
    for (ai, t) in a.iter().zip(basis) {
        w = w.axpy(*ai, t);
    }
    let angle = w.norm();
    let u = if angle == 0.0 {
        *u0
    } else {
        (*u0 * angle.cos()).axpy(angle.sin() / angle, &w)
    };
    u.normalized().unwrap_or(*u0)
}

/// `count` nearly uniform unit vectors in dimension `dim`: a Fibonacci
/// spiral for `dim = 3`, equally spaced angles for `dim = 2`.
pub fn fibonacci_directions(dim: usize, count: usize) -> Result<Vec<Vector>> {
    if count == 0 {
        return Err(Error::EmptyGrid);
    }
    match dim {
        2 => Ok((0..count)
            .map(|k| {
                let a = 2.0 * PI * (k as f64 + 0.5) / count as f64;
                Vector::from_slice(&[a.cos(), a.sin()])
            })
            .collect()),
        3 => {
            let golden = PI * (3.0 - 5f64.sqrt());
            Ok((0..count)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
                    let s = (1.0 - z * z).sqrt();
                    let a = golden * k as f64;
                    Vector::from_slice(&[s * a.cos(), s * a.sin(), z])
                })
                .collect())
        }
        n => Err(Error::InvalidArgument(format!("direction sets exist for n = 2 and n = 3, not {n}"))),
    }
}
