//! Small deterministic 1-D and low-dimensional solvers plus Gauss–Legendre
//! nodes. Everything here is allocation-light because it runs inside
//! per-sample loops.

use crate::linalg::Vector;

/// Bisection for a sign change of `f` on `[lo, hi]`.
///
/// Returns the midpoint of the final bracket once its width drops below
/// `tol`. `f(lo)` and `f(hi)` must have opposite signs (zero counts as
/// either sign); otherwise `None`.
pub fn bisect(mut f: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> Option<f64> {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Some(lo);
    }
    if f_hi == 0.0 {
        return Some(hi);
    }
    if f_lo.signum() == f_hi.signum() || !f_lo.is_finite() || !f_hi.is_finite() {
        return None;
    }
    for _ in 0..200 {
        if (hi - lo).abs() <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Some(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Bisection on a monotone predicate: `pred(lo)` is false, `pred(hi)` is
/// true; returns the final `(lo, hi)` with `hi - lo <= tol`.
pub fn bisect_predicate(mut pred: impl FnMut(f64) -> bool, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo, hi)
}

/// Golden-section search for a minimum of a unimodal `f` on `[a, b]`.
/// Returns `(argmin, min)`.
pub fn golden_section(mut f: impl FnMut(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    [(x, fx), (c, fc), (d, fd)]
        .into_iter()
        .fold((x, fx), |best, cand| if cand.1 < best.1 { cand } else { best })
}

#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    pub initial_step: f64,
    pub f_tol: f64,
    pub x_tol: f64,
    pub max_iter: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            initial_step: 1e-2,
            f_tol: 1e-15,
            x_tol: 1e-12,
            max_iter: 2000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Minimum {
    pub x: Vector,
    pub value: f64,
    pub iterations: usize,
}

/// Nelder–Mead simplex minimization (standard coefficients) with one
/// automatic restart from the best vertex, which guards against premature
/// collapse of the simplex.
pub fn nelder_mead(mut f: impl FnMut(&Vector) -> f64, x0: Vector, opts: NelderMeadOptions) -> Minimum {
    let first = nelder_mead_pass(&mut f, x0, opts);
    let restart = NelderMeadOptions {
        initial_step: opts.initial_step * 0.1,
        ..opts
    };
    let second = nelder_mead_pass(&mut f, first.x, restart);
    Minimum {
        iterations: first.iterations + second.iterations,
        ..if second.value <= first.value { second } else { first }
    }
}

fn nelder_mead_pass(f: &mut impl FnMut(&Vector) -> f64, x0: Vector, opts: NelderMeadOptions) -> Minimum {
    let n = x0.len();
    if n == 0 {
        let value = f(&x0);
        return Minimum { x: x0, value, iterations: 0 };
    }
    let mut simplex: Vec<(Vector, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0, f(&x0)));
    for i in 0..n {
        let mut x = x0;
        x[i] += opts.initial_step;
        simplex.push((x, f(&x)));
    }
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        let spread = simplex
            .iter()
            .skip(1)
            .map(|(x, _)| (*x - simplex[0].0).max_abs())
            .fold(0.0, f64::max);
        if spread <= opts.x_tol || (worst - best).abs() <= opts.f_tol {
            break;
        }
        let mut centroid = Vector::zeros(n);
        for (x, _) in simplex.iter().take(n) {
            centroid += *x;
        }
        centroid = centroid * (1.0 / n as f64);
        let xw = simplex[n].0;
        let xr = centroid.axpy(1.0, &(centroid - xw));
        let fr = f(&xr);
        if fr < simplex[0].1 {
            let xe = centroid.axpy(2.0, &(centroid - xw));
            let fe = f(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < simplex[n].1 {
                let xc = centroid.axpy(0.5, &(xr - centroid));
                (xc, f(&xc))
            } else {
                let xc = centroid.axpy(0.5, &(xw - centroid));
                (xc, f(&xc))
            };
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let x_best = simplex[0].0;
                for vertex in simplex.iter_mut().skip(1) {
                    let x = x_best.axpy(0.5, &(vertex.0 - x_best));
                    *vertex = (x, f(&x));
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    Minimum {
        x: simplex[0].0,
        value: simplex[0].1,
        iterations,
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton iteration on
/// the Legendre recurrence. Nodes are returned in increasing order and are
/// exactly antisymmetric.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1);
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let m = order.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (order as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(order, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(order, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    if order % 2 == 1 {
        nodes[order / 2] = 0.0;
    }
    (nodes, weights)
}

/// Legendre polynomial `P_l(x)` and its derivative.
pub fn legendre_with_derivative(l: usize, x: f64) -> (f64, f64) {
    if l == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=l {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let lf = l as f64;
    let d = if (1.0 - x * x).abs() < 1e-300 {
        lf * (lf + 1.0) / 2.0 * x.signum().powi(l as i32 + 1)
    } else {
        lf * (x * p1 - p0) / (x * x - 1.0)
    };
    (p1, d)
}

/// Sixth-order central difference stencil offsets, in units of the step.
pub const STENCIL_OFFSETS: [f64; 6] = [-3.0, -2.0, -1.0, 1.0, 2.0, 3.0];
/// First-derivative weights at [`STENCIL_OFFSETS`].
pub const D1_WEIGHTS: [f64; 6] = [-1.0 / 60.0, 3.0 / 20.0, -3.0 / 4.0, 3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0];
/// Second-derivative weights at [`STENCIL_OFFSETS`]; the center carries
/// [`D2_CENTER`].
pub const D2_WEIGHTS: [f64; 6] = [1.0 / 90.0, -3.0 / 20.0, 3.0 / 2.0, 3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0];
pub const D2_CENTER: f64 = -49.0 / 18.0;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_sqrt_two() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-10).is_none());
    }

    #[test]
    fn predicate_bisection_brackets_threshold() {
        let (lo, hi) = bisect_predicate(|s| s > 0.3, 0.0, 1.0, 1e-12);
        assert!(lo <= 0.3 && hi >= 0.3 && hi - lo <= 1e-12);
    }

    #[test]
    fn golden_section_minimizes_parabola() {
        let (x, v) = golden_section(|x| (x - 0.7).powi(2), -3.0, 4.0, 1e-12);
        assert!((x - 0.7).abs() < 1e-10);
        assert!(v < 1e-20);
    }

    #[test]
    fn nelder_mead_rosenbrock() {
        let f = |x: &Vector| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let m = nelder_mead(
            f,
            Vector::from_slice(&[-1.2, 1.0]),
            NelderMeadOptions {
                initial_step: 0.5,
                max_iter: 20_000,
                ..Default::default()
            },
        );
        assert!((m.x[0] - 1.0).abs() < 1e-6 && (m.x[1] - 1.0).abs() < 1e-6, "{m:?}");
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(8);
        let sum_w: f64 = w.iter().sum();
        assert!((sum_w - 2.0).abs() < 1e-14);
        // degree 14 monomial: integral 2/15
        let integral: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((integral - 2.0 / 15.0).abs() < 1e-14);
        for i in 0..8 {
            assert_eq!(x[i], -x[7 - i]);
        }
        let (x, w) = gauss_legendre(64);
        let integral: f64 = x.iter().zip(&w).map(|(x, w)| w * x.cos()).sum();
        assert!((integral - 2.0 * 1f64.sin()).abs() < 1e-14);
    }

    #[test]
    fn sixth_order_stencils_are_exact_on_sextics() {
        let f = |x: f64| x.powi(6) - 3.0 * x.powi(4) + x.powi(3) + 2.0 * x;
        let df = |x: f64| 6.0 * x.powi(5) - 12.0 * x.powi(3) + 3.0 * x * x + 2.0;
        let d2f = |x: f64| 30.0 * x.powi(4) - 36.0 * x * x + 6.0 * x;
        let (x0, h) = (0.5, 0.1);
        let d1: f64 = STENCIL_OFFSETS.iter().zip(D1_WEIGHTS).map(|(o, w)| w * f(x0 + o * h)).sum::<f64>() / h;
        let d2: f64 = (STENCIL_OFFSETS.iter().zip(D2_WEIGHTS).map(|(o, w)| w * f(x0 + o * h)).sum::<f64>()
            + D2_CENTER * f(x0))
            / (h * h);
        assert!((d1 - df(x0)).abs() < 1e-12);
        assert!((d2 - d2f(x0)).abs() < 1e-10);
    }
}
