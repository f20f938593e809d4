//! Independent oracles for the closed-form kernel: fourth-order Runge–Kutta
//! integration of the geodesic and parallel-transport equations of the
//! conformal metric `g = h^2 <.,.>`, using only the Christoffel symbols
//! `Gamma^k_ij = d_ik df_j + d_jk df_i - d_ij df_k` with `f = log h`.

#![allow(dead_code)]

use alexandrov_core::{ModelKind, SpaceForm, Vector};
use rand::Rng;

/// Integration step used by every oracle.
pub const ODE_STEP: f64 = 1e-3;

fn geodesic_rhs(model: &SpaceForm, x: &Vector, v: &Vector) -> (Vector, Vector) {
    (*v, -model.christoffel_contract(x, v))
}

/// Integrate the geodesic equation from `(x, v)` over `[0, t_end]`.
/// Returns the end point, end velocity, and the metric arclength.
pub fn integrate_geodesic(model: &SpaceForm, x0: &Vector, v0: &Vector, t_end: f64) -> (Vector, Vector, f64) {
    integrate_geodesic_with(model, x0, v0, t_end, ODE_STEP)
}

/// [`integrate_geodesic`] with an explicit step.
pub fn integrate_geodesic_with(model: &SpaceForm, x0: &Vector, v0: &Vector, t_end: f64, step: f64) -> (Vector, Vector, f64) {
    let steps = ((t_end.abs() / step).ceil() as usize).max(1);
    let dt = t_end / steps as f64;
    let (mut x, mut v) = (*x0, *v0);
    let speed = |x: &Vector, v: &Vector| model.conformal_factor(x) * v.norm();
    let mut length = 0.0;
    for _ in 0..steps {
        // Arclength rides along as a third RK4 component.
        let (k1x, k1v) = geodesic_rhs(model, &x, &v);
        let (x2, v2) = (x.axpy(0.5 * dt, &k1x), v.axpy(0.5 * dt, &k1v));
        let (k2x, k2v) = geodesic_rhs(model, &x2, &v2);
        let (x3, v3) = (x.axpy(0.5 * dt, &k2x), v.axpy(0.5 * dt, &k2v));
        let (k3x, k3v) = geodesic_rhs(model, &x3, &v3);
        let (x4, v4) = (x.axpy(dt, &k3x), v.axpy(dt, &k3v));
        let (k4x, k4v) = geodesic_rhs(model, &x4, &v4);
        length += dt.abs() / 6.0
            * (speed(&x, &v) + 2.0 * speed(&x2, &v2) + 2.0 * speed(&x3, &v3) + speed(&x4, &v4));
        x = x.axpy(dt / 6.0, &(k1x + k2x * 2.0 + k3x * 2.0 + k4x));
        v = v.axpy(dt / 6.0, &(k1v + k2v * 2.0 + k3v * 2.0 + k4v));
    }
    (x, v, length)
}

/// Shooting method: the initial chart velocity `v` with `x(1) = target`,
/// found by damped Newton iteration with a finite-difference Jacobian of the
/// ODE flow, continued along the chart segment towards the target. Starts
/// from the chart difference, so it never touches the closed forms under
/// test.
pub fn shoot(model: &SpaceForm, from: &Vector, target: &Vector, step: f64) -> Option<Vector> {
    const STAGES: usize = 8;
    let mut v = (*target - *from) * (1.0 / STAGES as f64);
    for stage in 1..=STAGES {
        let goal = from.axpy(stage as f64 / STAGES as f64, &(*target - *from));
        if stage > 1 {
            v = v * (stage as f64 / (stage - 1) as f64);
        }
        v = newton_shoot(model, from, &goal, v, step)?;
    }
    Some(v)
}

fn newton_shoot(model: &SpaceForm, from: &Vector, goal: &Vector, mut v: Vector, step: f64) -> Option<Vector> {
    let n = model.dim;
    let end_of = |v: &Vector| integrate_geodesic_with(model, from, v, 1.0, step).0;
    let mut residual = end_of(&v) - *goal;
    for _ in 0..40 {
        if residual.norm() < 1e-12 * (1.0 + goal.norm()) {
            return Some(v);
        }
        let eps = 1e-6 * (1.0 + v.norm());
        let mut jac = nalgebra::DMatrix::zeros(n, n);
        for j in 0..n {
            let mut vp = v;
            vp[j] += eps;
            let mut vm = v;
            vm[j] -= eps;
            let col = (end_of(&vp) - end_of(&vm)) * (0.5 / eps);
            for i in 0..n {
                jac[(i, j)] = col[i];
            }
        }
        let rhs = nalgebra::DVector::from_iterator(n, residual.as_slice().iter().copied());
        let step = jac.lu().solve(&rhs)?;
        let step = Vector::from_fn(n, |i| step[i]);
        let mut lambda = 1.0;
        loop {
            let trial = v.axpy(-lambda, &step);
            let end = end_of(&trial);
            let r = end - *goal;
            if end.is_finite() && model.in_domain(&end) && r.norm() < residual.norm() {
                v = trial;
                residual = r;
                break;
            }
            lambda *= 0.5;
            if lambda < 1e-6 {
                return (residual.norm() < 1e-10 * (1.0 + goal.norm())).then_some(v);
            }
        }
    }
    (residual.norm() < 1e-10 * (1.0 + goal.norm())).then_some(v)
}

/// Geodesic distance by shooting plus arclength quadrature.
pub fn ode_distance(model: &SpaceForm, p: &Vector, q: &Vector) -> Option<f64> {
    ode_distance_with(model, p, q, ODE_STEP)
}

/// [`ode_distance`] with an explicit integration step; RK4 keeps the error
/// near `step^4` times the curvature scale.
pub fn ode_distance_with(model: &SpaceForm, p: &Vector, q: &Vector, step: f64) -> Option<f64> {
    let v = shoot(model, p, q, step)?;
    Some(integrate_geodesic_with(model, p, &v, 1.0, step).2)
}

/// Parallel transport of `w` along the geodesic leaving `x0` with velocity
/// `v0` for unit time, integrated jointly with the geodesic.
pub fn ode_transport(model: &SpaceForm, x0: &Vector, v0: &Vector, w0: &Vector) -> (Vector, Vector) {
    let rhs = |x: &Vector, v: &Vector, w: &Vector| {
        let df = model.grad_log_factor(x);
        // Gamma^k_ij v_i w_j = v_k (df.w) + w_k (df.v) - (v.w) df_k
        let dw = -((*v * df.dot(w)) + (*w * df.dot(v)) - df * v.dot(w));
        (*v, -model.christoffel_contract(x, v), dw)
    };
    let steps = (1.0 / ODE_STEP).ceil() as usize;
    let dt = 1.0 / steps as f64;
    let (mut x, mut v, mut w) = (*x0, *v0, *w0);
    for _ in 0..steps {
        let k1 = rhs(&x, &v, &w);
        let k2 = rhs(&x.axpy(0.5 * dt, &k1.0), &v.axpy(0.5 * dt, &k1.1), &w.axpy(0.5 * dt, &k1.2));
        let k3 = rhs(&x.axpy(0.5 * dt, &k2.0), &v.axpy(0.5 * dt, &k2.1), &w.axpy(0.5 * dt, &k2.2));
        let k4 = rhs(&x.axpy(dt, &k3.0), &v.axpy(dt, &k3.1), &w.axpy(dt, &k3.2));
        x = x.axpy(dt / 6.0, &(k1.0 + k2.0 * 2.0 + k3.0 * 2.0 + k4.0));
        v = v.axpy(dt / 6.0, &(k1.1 + k2.1 * 2.0 + k3.1 * 2.0 + k4.1));
        w = w.axpy(dt / 6.0, &(k1.2 + k2.2 * 2.0 + k3.2 * 2.0 + k4.2));
    }
    (x, w)
}

/// A random chart point in a comfortable part of each model's domain.
pub fn random_point(model: &SpaceForm, rng: &mut impl Rng) -> Vector {
    let n = model.dim;
    match model.kind {
        ModelKind::Euclidean => Vector::from_fn(n, |_| rng.gen_range(-2.0..2.0)),
        ModelKind::Hyperbolic => Vector::from_fn(n, |i| {
            if i + 1 == n {
                rng.gen_range(0.3..3.0)
            } else {
                rng.gen_range(-1.5..1.5)
            }
        }),
        ModelKind::Spherical => loop {
            let x = Vector::from_fn(n, |_| rng.gen_range(-0.9..0.9));
            if x.norm() < 0.9 {
                break x;
            }
        },
    }
}

/// Random chart components of metric norm `len` at `x`.
pub fn random_tangent(model: &SpaceForm, x: &Vector, len: f64, rng: &mut impl Rng) -> Vector {
    let n = model.dim;
    let dir = loop {
        let d = Vector::from_fn(n, |_| rng.gen_range(-1.0..1.0));
        if d.norm() > 0.1 && d.norm() <= 1.0 {
            break d * (1.0 / d.norm());
        }
    };
    dir * (len / model.conformal_factor(x))
}

pub fn all_models(dim: usize) -> [SpaceForm; 3] {
    [
        SpaceForm::euclidean(dim),
        SpaceForm::hyperbolic(dim),
        SpaceForm::spherical(dim),
    ]
}
