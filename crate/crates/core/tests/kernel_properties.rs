mod common;

use alexandrov_core::{ModelKind, SpaceForm, Vector};
use common::{integrate_geodesic, ode_distance, ode_transport, random_point, random_tangent};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn model_strategy() -> impl Strategy<Value = SpaceForm> {
    (prop_oneof![
        Just(ModelKind::Euclidean),
        Just(ModelKind::Hyperbolic),
        Just(ModelKind::Spherical)
    ], 2usize..=4)
        .prop_map(|(kind, dim)| SpaceForm::new(kind, dim).unwrap())
}

fn metric_norm(model: &SpaceForm, x: &Vector, v: &Vector) -> f64 {
    model.conformal_factor(x) * v.norm()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn exp_then_log_is_identity(model in model_strategy(), seed in any::<u64>(), len in 0.05f64..1.4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_point(&model, &mut rng);
        let v = random_tangent(&model, &x, len, &mut rng);
        let y = model.exp_raw(&x, &v);
        let back = model.log_raw(&x, &y);
        prop_assert!(metric_norm(&model, &x, &(back - v)) <= 1e-9 * (1.0 + len));
        prop_assert!((model.chart_distance(&x, &y) - len).abs() <= 1e-10);
    }

    #[test]
    fn transport_is_an_isometry(model in model_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_point(&model, &mut rng);
        let y = random_point(&model, &mut rng);
        let a = random_tangent(&model, &x, 1.0, &mut rng);
        let b = random_tangent(&model, &x, 0.7, &mut rng);
        let ta = model.transport_raw(&x, &y, &a);
        let tb = model.transport_raw(&x, &y, &b);
        let hx2 = model.conformal_factor(&x).powi(2);
        let hy2 = model.conformal_factor(&y).powi(2);
        prop_assert!((hy2 * ta.dot(&tb) - hx2 * a.dot(&b)).abs() <= 1e-10);
        // Transport back along the same geodesic undoes it.
        let back = model.transport_raw(&y, &x, &ta);
        prop_assert!(metric_norm(&model, &x, &(back - a)) <= 1e-9);
    }

    #[test]
    fn reflections_are_involutive_isometries(model in model_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_point(&model, &mut rng);
        let q = random_point(&model, &mut rng);
        let c = random_point(&model, &mut rng);
        let pt = model.point_from(c).unwrap();
        let dir = random_tangent(&model, &c, 1.0, &mut rng);
        let plane = alexandrov_core::GeodesicHyperplane::through_point(&pt, &pt.tangent(dir)).unwrap();
        let rp = plane.reflect_coords(&p).unwrap();
        let rq = plane.reflect_coords(&q).unwrap();
        let rrp = plane.reflect_coords(&rp).unwrap();
        prop_assert!(model.chart_distance(&rrp, &p) <= 1e-10);
        let d0 = model.chart_distance(&p, &q);
        let d1 = model.chart_distance(&rp, &rq);
        prop_assert!((d0 - d1).abs() <= 1e-10 * (1.0 + d0));
        prop_assert!(plane.distance_to(&pt) <= 1e-12);
    }

    #[test]
    fn triangle_inequality(model in model_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_point(&model, &mut rng);
        let b = random_point(&model, &mut rng);
        let c = random_point(&model, &mut rng);
        let ab = model.chart_distance(&a, &b);
        let bc = model.chart_distance(&b, &c);
        let ac = model.chart_distance(&a, &c);
        prop_assert!(ac <= ab + bc + 1e-12);
        prop_assert!((ab - model.chart_distance(&b, &a)).abs() <= 1e-13 * (1.0 + ab));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn closed_forms_match_geodesic_ode(model in model_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_point(&model, &mut rng);
        let y = random_point(&model, &mut rng);
        let d = ode_distance(&model, &x, &y).expect("shooting converges");
        prop_assert!((d - model.chart_distance(&x, &y)).abs() <= 1e-6);

        let v = random_tangent(&model, &x, 0.8, &mut rng);
        let (end, _, len) = integrate_geodesic(&model, &x, &v, 1.0);
        prop_assert!(model.chart_distance(&end, &model.exp_raw(&x, &v)) <= 1e-8);
        prop_assert!((len - 0.8).abs() <= 1e-8);

        let w = random_tangent(&model, &x, 1.0, &mut rng);
        let (end, tw) = ode_transport(&model, &x, &v, &w);
        let closed = model.transport_raw(&x, &end, &w);
        prop_assert!(metric_norm(&model, &end, &(closed - tw)) <= 1e-8);
    }
}
