//! Lemma verifiers against independent oracles.

use alexandrov_core::estimates::{
    verify_metric_lemmas, verify_normal_stability, verify_projection_curvature, CheckKind, CheckTag, CutSpec,
    LemmaReport, MetricSampleSpec, PairSpec,
};
use alexandrov_core::hypersurface::{DirectionGrid, GridSpec, Harmonic, RadialSurface, SurfaceFamily};
use alexandrov_core::{SpaceForm, Vector};

fn grid(level: usize) -> DirectionGrid {
    DirectionGrid::new(GridSpec::new(3, level)).unwrap()
}

fn constant(report: &LemmaReport, name: &str) -> f64 {
    report.constants.iter().find(|c| c.name == name).unwrap().value
}

#[test]
fn sphere_normal_lipschitz_constant_is_inverse_radius() {
    for r0 in [0.5, 0.8, 1.5] {
        let s = RadialSurface::centered(SpaceForm::euclidean(3), SurfaceFamily::GeodesicSphere { radius: r0 }).unwrap();
        let sampled = s.sample(&grid(4)).unwrap();
        let out = verify_normal_stability(&s, &sampled, &PairSpec::default()).unwrap();
        assert!((out.lipschitz * r0 - 1.0).abs() < 0.02, "r0 = {r0}: {}", out.lipschitz);
        assert!(out.report.passed());
    }
}

#[test]
fn ellipsoid_normal_lipschitz_constant_tracks_largest_curvature() {
    // Semi-axes (2, 1, 1): largest principal curvature 2 at the long-axis tips.
    let s = RadialSurface::centered(SpaceForm::euclidean(3), SurfaceFamily::ChartEllipsoid { axes: vec![2.0, 1.0, 1.0] })
        .unwrap();
    let sampled = s.sample(&grid(4)).unwrap();
    let out = verify_normal_stability(&s, &sampled, &PairSpec::default()).unwrap();
    assert!(out.lipschitz <= 2.2 && out.lipschitz > 1.5, "{}", out.lipschitz);
    assert!(out.lipschitz <= 10.0 / out.rho);
    assert!(out.report.passed());
}

#[test]
fn normal_lipschitz_heuristic_holds_in_curved_models() {
    for model in [SpaceForm::hyperbolic(3), SpaceForm::spherical(3)] {
        let s = RadialSurface::centered(
            model,
            SurfaceFamily::PerturbedSphere {
                radius: 0.7,
                eps: 0.1,
                harmonic: Harmonic::Zonal(2),
            },
        )
        .unwrap();
        let sampled = s.sample(&grid(4)).unwrap();
        let out = verify_normal_stability(&s, &sampled, &PairSpec::default()).unwrap();
        assert!(out.lipschitz <= 10.0 / out.rho, "{model:?}");
        assert_eq!(out.report.count(CheckTag::NormalLipschitzHeuristic), 1);
        assert!(out.report.constants[0].stable);
    }
}

#[test]
fn hyperbolic_distance_constants_approach_the_vertical_line_extremes() {
    // The hyperbolic sphere of radius R about e_n is the chart sphere with
    // center cosh(R) e_n and radius sinh(R), so |q - e_n| ranges over
    // [1 - e^-R, e^R - 1] and d / |q - e_n| over [R / (e^R - 1), R / (1 - e^-R)].
    let big_r = 1.0_f64;
    let lower = big_r / (big_r.exp() - 1.0);
    let upper = big_r / (1.0 - (-big_r).exp());
    let model = SpaceForm::hyperbolic(3);
    let e_n = model.origin().coords;
    for (t, expect) in [(big_r, lower), (-big_r, upper)] {
        let q = Vector::from_slice(&[0.0, 0.0, t.exp()]);
        assert!((model.chart_distance(&q, &e_n) / (q - e_n).norm() - expect).abs() < 1e-12);
    }

    let s = RadialSurface::centered(model, SurfaceFamily::GeodesicSphere { radius: 0.8 }).unwrap();
    let sampled = s.sample(&grid(3)).unwrap();
    let spec = MetricSampleSpec {
        hyperbolic_radius: big_r,
        ..Default::default()
    };
    let report = verify_metric_lemmas(&spec, &s, &sampled).unwrap();
    let c = constant(&report, "hyperbolic_distance_lower");
    let big_c = constant(&report, "hyperbolic_distance_upper");
    assert!(c >= lower && c < lower * 1.05, "{c} vs {lower}");
    assert!(big_c <= upper && big_c > upper * 0.95, "{big_c} vs {upper}");
    assert_eq!(report.count(CheckTag::SphereDistanceLower), 10_000);
    assert!(report.constants.iter().all(|k| k.stable), "{:?}", report.constants);
    assert!(report.passed(), "{:?}", report.failures().next());
}

#[test]
fn ball_area_constant_on_unit_sphere_matches_caps() {
    // Small caps on the unit sphere: area / r^2 -> pi.
    let s = RadialSurface::centered(SpaceForm::euclidean(3), SurfaceFamily::GeodesicSphere { radius: 1.0 }).unwrap();
    let sampled = s.sample(&grid(4)).unwrap();
    let spec = MetricSampleSpec { pairs: 0, ..Default::default() };
    let report = verify_metric_lemmas(&spec, &s, &sampled).unwrap();
    let c = constant(&report, "ball_area");
    assert!(c > 2.3 && c <= std::f64::consts::PI, "{c}");
    assert_eq!(report.count(CheckTag::SphereDistanceLower), 0);
}

#[test]
fn sandwich_and_identity_hold_on_an_ellipsoid() {
    let s = RadialSurface::centered(SpaceForm::euclidean(3), SurfaceFamily::ChartEllipsoid { axes: vec![1.3, 1.0, 0.9] })
        .unwrap();
    let model = s.model;
    let v = model.origin().tangent(Vector::from_slice(&[0.0, 0.6, 0.8]));
    let plane = model.make_hyperplane(&v, 0.3).unwrap();
    let report = verify_projection_curvature(&s, &plane, &CutSpec::default()).unwrap();
    assert_eq!(report.count(CheckTag::ProjectionIdentity), CutSpec::default().samples);
    assert!(report.min_margin(CheckKind::Identity).unwrap() >= -1e-8);
    assert!(report.min_margin(CheckKind::ConstantFree).unwrap() >= -1e-6);
}
