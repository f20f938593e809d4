//! Isometries as explicit chains of primitive chart maps.
//!
//! Keeping the chain (rather than a single matrix) makes every step exact in
//! chart coordinates and the inverse trivial: invert each step and reverse.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{orthogonal_complement, Vector};

use super::{ChartPoint, GeodesicHyperplane, ModelKind, SpaceForm, TangentVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum IsometryStep {
    /// Reflection in a totally geodesic hyperplane (chart inversion or
    /// affine reflection).
    Reflection(GeodesicHyperplane),
    /// Orthogonal chart map `x -> Q x` about the Euclidean origin; in the
    /// hyperbolic chart `Q` must fix `e_n`.
    Rotation { rows: Vec<Vector> },
    /// Chart translation; horizontal only in the hyperbolic chart.
    Translation { shift: Vector },
    /// Hyperbolic dilation `x -> lambda x` about the boundary origin.
    Dilation { factor: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartIsometry {
    pub model: SpaceForm,
    pub steps: Vec<IsometryStep>,
}

impl IsometryStep {
    fn validate(&self, model: &SpaceForm) -> Result<()> {
        let n = model.dim;
        match self {
            IsometryStep::Reflection(pi) => {
                if pi.model.kind != model.kind || pi.model.dim != n {
                    return Err(Error::ModelMismatch(model.kind, pi.model.kind));
                }
            }
            IsometryStep::Rotation { rows } => {
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: rows.len(),
                    });
                }
                for i in 0..n {
                    for j in 0..n {
                        let target = if i == j { 1.0 } else { 0.0 };
                        if (rows[i].dot(&rows[j]) - target).abs() > 1e-10 {
                            return Err(Error::InvalidArgument("rotation matrix is not orthogonal".into()));
                        }
                    }
                }
                if model.kind == ModelKind::Hyperbolic && (rows[n - 1][n - 1] - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidArgument(
                        "hyperbolic chart rotations must fix the vertical axis".into(),
                    ));
                }
            }
            IsometryStep::Translation { shift } => {
                if shift.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: shift.len(),
                    });
                }
                match model.kind {
                    ModelKind::Euclidean => {}
                    ModelKind::Hyperbolic if shift[n - 1] == 0.0 => {}
                    _ => {
                        return Err(Error::InvalidArgument(format!(
                            "translation by {shift:?} is not an isometry of the {} chart",
                            model.kind
                        )))
                    }
                }
            }
            IsometryStep::Dilation { factor } => {
                if model.kind != ModelKind::Hyperbolic || !(*factor > 0.0) {
                    return Err(Error::InvalidArgument("dilations are hyperbolic isometries only".into()));
                }
            }
        }
        Ok(())
    }

    fn apply(&self, x: &Vector) -> Result<Vector> {
        Ok(match self {
            IsometryStep::Reflection(pi) => pi.reflect_coords(x)?,
            IsometryStep::Rotation { rows } => Vector::from_fn(x.len(), |i| rows[i].dot(x)),
            IsometryStep::Translation { shift } => *x + *shift,
            IsometryStep::Dilation { factor } => *x * *factor,
        })
    }

    /// Push a chart tangent vector `v` at `x` (which maps to `y`).
    fn push(&self, x: &Vector, y: &Vector, v: &Vector) -> Vector {
        match self {
            IsometryStep::Reflection(pi) => {
                let w = pi.reflect_ambient_vector(&pi.model.push_tangent(x, v));
                pi.model.pull_tangent(y, &w)
            }
            IsometryStep::Rotation { rows } => Vector::from_fn(v.len(), |i| rows[i].dot(v)),
            IsometryStep::Translation { .. } => *v,
            IsometryStep::Dilation { factor } => *v * *factor,
        }
    }

    fn inverse(&self) -> Self {
        match self {
            IsometryStep::Reflection(pi) => IsometryStep::Reflection(*pi),
            IsometryStep::Rotation { rows } => {
                let n = rows.len();
                IsometryStep::Rotation {
                    rows: (0..n).map(|i| Vector::from_fn(n, |j| rows[j][i])).collect(),
                }
            }
            IsometryStep::Translation { shift } => IsometryStep::Translation { shift: -*shift },
            IsometryStep::Dilation { factor } => IsometryStep::Dilation { factor: 1.0 / factor },
        }
    }

    fn determinant_sign(&self) -> f64 {
        match self {
            IsometryStep::Reflection(_) => -1.0,
            IsometryStep::Rotation { rows } => {
                let n = rows.len();
                let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
                m.determinant().signum()
            }
            _ => 1.0,
        }
    }
}

impl ChartIsometry {
    pub fn identity(model: SpaceForm) -> Self {
        Self { model, steps: Vec::new() }
    }

    pub fn new(model: SpaceForm, steps: Vec<IsometryStep>) -> Result<Self> {
        for s in &steps {
            s.validate(&model)?;
        }
        Ok(Self { model, steps })
    }

    pub fn is_identity(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn then(mut self, step: IsometryStep) -> Result<Self> {
        step.validate(&self.model)?;
        self.steps.push(step);
        Ok(self)
    }

    pub fn apply_coords(&self, x: &Vector) -> Result<Vector> {
        let mut y = *x;
        for s in &self.steps {
            y = s.apply(&y)?;
        }
        Ok(y)
    }

    pub fn apply(&self, p: &ChartPoint) -> Result<ChartPoint> {
        let y = self.apply_coords(&p.coords)?;
        self.model.point_from(y)
    }

    /// Pushforward of a tangent vector.
    pub fn push(&self, v: &TangentVector) -> Result<TangentVector> {
        let mut x = v.base.coords;
        let mut w = v.comps;
        for s in &self.steps {
            let y = s.apply(&x)?;
            w = s.push(&x, &y, &w);
            x = y;
        }
        Ok(TangentVector {
            base: self.model.point_from(x)?,
            comps: w,
        })
    }

    pub fn inverse(&self) -> Self {
        Self {
            model: self.model,
            steps: self.steps.iter().rev().map(IsometryStep::inverse).collect(),
        }
    }

    /// `+1` for orientation-preserving chains, `-1` otherwise.
    pub fn orientation(&self) -> f64 {
        self.steps.iter().map(IsometryStep::determinant_sign).product()
    }
}

impl SpaceForm {
    /// An orientation-preserving isometry sending `p` to the chart origin and
    /// the hyperplane spanned by `frame` (tangent at `p`) to `{x_n = 0}`.
    ///
    /// The normal `N` completing `frame` to a positive basis is sent to a
    /// positive multiple of `e_n`.
    pub fn origin_chart(&self, p: &ChartPoint, frame: &[TangentVector]) -> Result<ChartIsometry> {
        let n = self.dim;
        if frame.len() != n - 1 {
            return Err(Error::DegenerateFrame);
        }
        for f in frame {
            self.check_based_at(p, f)?;
        }
        let comps: Vec<Vector> = frame.iter().map(|f| f.comps).collect();
        let mut normal = orthogonal_complement(&comps, 1e-10 * comps.iter().map(|c| c.norm()).fold(0.0, f64::max))
            .ok_or(Error::DegenerateFrame)?;
        let m = DMatrix::from_fn(n, n, |i, j| if j + 1 < n { comps[j][i] } else { normal[i] });
        if m.determinant() < 0.0 {
            normal = -normal;
        }
        self.origin_chart_with_normal(p, &p.tangent(normal))
    }

    /// An orientation-preserving isometry sending `p` to the chart origin and
    /// `normal` to a positive multiple of `e_n`.
    pub fn origin_chart_with_normal(&self, p: &ChartPoint, normal: &TangentVector) -> Result<ChartIsometry> {
        self.check_point(p)?;
        self.check_based_at(p, normal)?;
        if normal.comps.norm() == 0.0 {
            return Err(Error::DegenerateFrame);
        }
        let n = self.dim;
        let x = p.coords;
        let mut iso = ChartIsometry::identity(*self);
        match self.kind {
            ModelKind::Euclidean => {
                if x.max_abs() != 0.0 {
                    iso = iso.then(IsometryStep::Translation { shift: -x })?;
                }
            }
            ModelKind::Hyperbolic => {
                let mut horizontal = x;
                horizontal[n - 1] = 0.0;
                if horizontal.max_abs() != 0.0 {
                    iso = iso.then(IsometryStep::Translation { shift: -horizontal })?;
                }
                if x[n - 1] != 1.0 {
                    iso = iso.then(IsometryStep::Dilation { factor: 1.0 / x[n - 1] })?;
                }
            }
            ModelKind::Spherical => {
                if x.max_abs() != 0.0 {
                    // Perpendicular bisector of p and the origin.
                    let a = self.to_ambient(&x) - self.ambient_origin();
                    let pi = GeodesicHyperplane::from_ambient_normal(*self, a, 0.0)?;
                    iso = iso.then(IsometryStep::Reflection(pi))?;
                }
            }
        }
        let at_origin = iso.push(normal)?;
        let unit = at_origin.comps.normalized().ok_or(Error::DegenerateFrame)?;
        let en = Vector::basis(n, n - 1);
        let gap = unit - en;
        let o = self.origin();
        if gap.norm() > 1e-15 {
            let pi = GeodesicHyperplane::through_point(&o, &o.tangent(gap))?;
            iso = iso.then(IsometryStep::Reflection(pi))?;
        }
        if iso.orientation() < 0.0 {
            let pi = GeodesicHyperplane::through_point(&o, &o.tangent(Vector::basis(n, 0)))?;
            iso = iso.then(IsometryStep::Reflection(pi))?;
        }
        Ok(iso)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_point_with_aligned_frame_gives_identity() {
        for m in [SpaceForm::euclidean(3), SpaceForm::hyperbolic(3), SpaceForm::spherical(3)] {
            let o = m.origin();
            let frame = [o.tangent(Vector::basis(3, 0)), o.tangent(Vector::basis(3, 1))];
            let iso = m.origin_chart(&o, &frame).unwrap();
            assert!(iso.is_identity(), "{:?}", iso.steps);
        }
    }

    #[test]
    fn origin_chart_sends_point_and_frame() {
        let pts: [(SpaceForm, [f64; 3]); 3] = [
            (SpaceForm::euclidean(3), [1.0, -2.0, 0.5]),
            (SpaceForm::hyperbolic(3), [0.4, -0.3, 2.5]),
            (SpaceForm::spherical(3), [0.3, 0.0, 0.4]),
        ];
        for (m, c) in pts {
            let p = m.point(&c).unwrap();
            let frame = [
                p.tangent(Vector::from_slice(&[1.0, 1.0, 0.0])),
                p.tangent(Vector::from_slice(&[0.0, 1.0, -2.0])),
            ];
            let iso = m.origin_chart(&p, &frame).unwrap();
            assert_eq!(iso.orientation(), 1.0);
            let img = iso.apply(&p).unwrap();
            assert!((img.coords - m.origin().coords).max_abs() < 1e-12, "{:?}", m.kind);
            for f in &frame {
                let pushed = iso.push(f).unwrap();
                assert!(pushed.comps[2].abs() < 1e-12);
                assert!((pushed.norm() - f.norm()).abs() < 1e-12 * f.norm());
            }
            let back = iso.inverse().apply(&img).unwrap();
            assert!((back.coords - p.coords).max_abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_steps_are_rejected() {
        let s = SpaceForm::spherical(3);
        assert!(ChartIsometry::new(
            s,
            vec![IsometryStep::Translation {
                shift: Vector::basis(3, 0)
            }]
        )
        .is_err());
        let h = SpaceForm::hyperbolic(3);
        assert!(ChartIsometry::new(h, vec![IsometryStep::Dilation { factor: -1.0 }]).is_err());
        let p = h.origin();
        let frame = [p.tangent(Vector::basis(3, 0)), p.tangent(Vector::basis(3, 0) * 2.0)];
        assert_eq!(h.origin_chart(&p, &frame).unwrap_err(), Error::DegenerateFrame);
    }
}
