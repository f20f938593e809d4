//! Linear models of the curved space forms.
//!
//! The round sphere is the unit sphere in `R^{n+1}` and hyperbolic space is
//! the upper sheet of the hyperboloid `<X, X>_L = -1` in Minkowski space with
//! the time coordinate last. Geodesics, reflections and parallel transport are
//! linear algebra there, so the chart operations are implemented by lifting,
//! acting, and projecting back. Both lifts send the chart origin to the last
//! basis vector, and chart axis `e_i` at the origin to the ambient axis `E_i`
//! (up to the conformal factor).
//!
//! Euclidean space is its own ambient model.

use crate::linalg::Vector;

use super::{ModelKind, SpaceForm};

impl SpaceForm {
    /// Dimension of the ambient linear model.
    pub fn ambient_dim(&self) -> usize {
        match self.kind {
            ModelKind::Euclidean => self.dim,
            ModelKind::Hyperbolic | ModelKind::Spherical => self.dim + 1,
        }
    }

    /// Ambient bilinear form: Euclidean dot product, or the Minkowski form
    /// with negative last coordinate for the hyperboloid.
    #[inline]
    pub fn ambient_inner(&self, a: &Vector, b: &Vector) -> f64 {
        match self.kind {
            ModelKind::Hyperbolic => {
                let n = self.dim;
                let mut s = -a[n] * b[n];
                for i in 0..n {
                    s += a[i] * b[i];
                }
                s
            }
            _ => a.dot(b),
        }
    }

    /// Lift chart coordinates to the ambient model.
    pub fn to_ambient(&self, x: &Vector) -> Vector {
        let n = self.dim;
        match self.kind {
            ModelKind::Euclidean => *x,
            ModelKind::Spherical => {
                let r2 = x.norm_squared();
                let s = 1.0 + r2;
                (*x * (2.0 / s)).extended((1.0 - r2) / s)
            }
            ModelKind::Hyperbolic => {
                let t = x[n - 1];
                let q = x.norm_squared();
                let mut out = *x * (1.0 / t);
                out[n - 1] = (q - 1.0) / (2.0 * t);
                out.extended((q + 1.0) / (2.0 * t))
            }
        }
    }

    /// Project an ambient point back to chart coordinates. The ambient point
    /// is assumed to lie on the model quadric.
    pub fn from_ambient(&self, big_x: &Vector) -> Vector {
        let n = self.dim;
        match self.kind {
            ModelKind::Euclidean => *big_x,
            ModelKind::Spherical => {
                // Stereographic projection from the south pole.
                big_x.truncated(n) * (1.0 / (1.0 + big_x[n]))
            }
            ModelKind::Hyperbolic => {
                let t = 1.0 / (big_x[n] - big_x[n - 1]);
                let mut x = big_x.truncated(n) * t;
                x[n - 1] = t;
                x
            }
        }
    }

    /// Differential of the lift: chart tangent `v` at chart point `x` to an
    /// ambient tangent vector at `to_ambient(x)`.
    pub fn push_tangent(&self, x: &Vector, v: &Vector) -> Vector {
        let n = self.dim;
        match self.kind {
            ModelKind::Euclidean => *v,
            ModelKind::Spherical => {
                let s = 1.0 + x.norm_squared();
                let xv = x.dot(v);
                (*v * (2.0 / s))
                    .axpy(-4.0 * xv / (s * s), x)
                    .extended(-4.0 * xv / (s * s))
            }
            ModelKind::Hyperbolic => {
                let t = x[n - 1];
                let vt = v[n - 1];
                let q = x.norm_squared();
                let dq_half = x.dot(v);
                let mut out = Vector::zeros(n + 1);
                for i in 0..n - 1 {
                    out[i] = v[i] / t - x[i] * vt / (t * t);
                }
                out[n - 1] = dq_half / t - (q - 1.0) * vt / (2.0 * t * t);
                out[n] = dq_half / t - (q + 1.0) * vt / (2.0 * t * t);
                out
            }
        }
    }

    /// Inverse of [`push_tangent`](Self::push_tangent): an ambient vector
    /// tangent to the quadric at the lift of `x` back to chart components.
    pub fn pull_tangent(&self, x: &Vector, w: &Vector) -> Vector {
        let n = self.dim;
        match self.kind {
            ModelKind::Euclidean => *w,
            ModelKind::Spherical => {
                let big_x = self.to_ambient(x);
                let denom = 1.0 + big_x[n];
                (w.truncated(n) * (1.0 / denom)).axpy(-w[n] / (denom * denom), &big_x.truncated(n))
            }
            ModelKind::Hyperbolic => {
                let t = x[n - 1];
                let dt = t * t * (w[n - 1] - w[n]);
                let mut out = Vector::zeros(n);
                for i in 0..n - 1 {
                    out[i] = w[i] * t + (x[i] / t) * dt;
                }
                out[n - 1] = dt;
                out
            }
        }
    }

    /// Ambient image of the chart origin.
    pub fn ambient_origin(&self) -> Vector {
        match self.kind {
            ModelKind::Euclidean => Vector::zeros(self.dim),
            _ => Vector::basis(self.dim + 1, self.dim),
        }
    }

    /// Re-normalize an ambient point onto the quadric (removes drift after
    /// long chains of linear maps).
    pub fn renormalize(&self, big_x: &Vector) -> Vector {
        match self.kind {
            ModelKind::Euclidean => *big_x,
            ModelKind::Spherical => big_x.normalized().unwrap_or(*big_x),
            ModelKind::Hyperbolic => {
                let q = -self.ambient_inner(big_x, big_x);
                if q > 0.0 {
                    *big_x * (1.0 / q.sqrt())
                } else {
                    *big_x
                }
            }
        }
    }

    /// Project an ambient vector onto the tangent space of the quadric at
    /// `big_x`.
    pub fn tangent_projection(&self, big_x: &Vector, w: &Vector) -> Vector {
        match self.kind {
            ModelKind::Euclidean => *w,
            ModelKind::Spherical => w.axpy(-big_x.dot(w), big_x),
            ModelKind::Hyperbolic => w.axpy(self.ambient_inner(big_x, w), big_x),
        }
    }

    /// Geodesic distance between ambient points, in a cancellation-free form.
    pub fn ambient_distance(&self, a: &Vector, b: &Vector) -> f64 {
        let diff = *a - *b;
        match self.kind {
            ModelKind::Euclidean => diff.norm(),
            ModelKind::Spherical => 2.0 * (0.5 * diff.norm()).min(1.0).asin(),
            ModelKind::Hyperbolic => {
                let q = self.ambient_inner(&diff, &diff).max(0.0);
                2.0 * (0.5 * q.sqrt()).asinh()
            }
        }
    }

    /// The generalized sine `sn(r)` of the model: `r`, `sin r`, `sinh r`.
    pub fn sn(&self, r: f64) -> f64 {
        match self.kind {
            ModelKind::Euclidean => r,
            ModelKind::Spherical => r.sin(),
            ModelKind::Hyperbolic => r.sinh(),
        }
    }

    /// The generalized cosine `cs(r)`: `1`, `cos r`, `cosh r`.
    pub fn cs(&self, r: f64) -> f64 {
        match self.kind {
            ModelKind::Euclidean => 1.0,
            ModelKind::Spherical => r.cos(),
            ModelKind::Hyperbolic => r.cosh(),
        }
    }

    /// Point at arclength `r` along the unit-speed ambient geodesic leaving
    /// `base` with unit ambient tangent `dir`.
    #[inline]
    pub fn ambient_geodesic(&self, base: &Vector, dir: &Vector, r: f64) -> Vector {
        match self.kind {
            ModelKind::Euclidean => base.axpy(r, dir),
            _ => (*base * self.cs(r)).axpy(self.sn(r), dir),
        }
    }

    /// Velocity of [`ambient_geodesic`](Self::ambient_geodesic) at arclength `r`.
    #[inline]
    pub fn ambient_geodesic_velocity(&self, base: &Vector, dir: &Vector, r: f64) -> Vector {
        match self.kind {
            ModelKind::Euclidean => *dir,
            ModelKind::Spherical => (*base * -r.sin()).axpy(r.cos(), dir),
            ModelKind::Hyperbolic => (*base * r.sinh()).axpy(r.cosh(), dir),
        }
    }
}
