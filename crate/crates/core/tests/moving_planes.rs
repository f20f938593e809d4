mod common;

use alexandrov_core::hypersurface::{DirectionGrid, GridSpec, Harmonic, RadialSurface, SurfaceFamily};
use alexandrov_core::moving_planes::{inner_projection, leaf_coordinate, MovingPlanes};
use alexandrov_core::{ChartIsometry, SpaceForm, Tolerances, Vector};
use alexandrov_core::spaceform::IsometryStep;

fn grid(level: usize) -> DirectionGrid {
    DirectionGrid::new(GridSpec::new(3, level)).unwrap()
}

fn perturbed(model: SpaceForm, eps: f64) -> RadialSurface {
    RadialSurface::centered(
        model,
        SurfaceFamily::PerturbedSphere {
            radius: 0.8,
            eps,
            harmonic: Harmonic::Xy,
        },
    )
    .unwrap()
}

#[test]
fn spheres_about_an_axis_point_have_critical_plane_through_the_center() {
    let v = Vector::from_slice(&[1.0, 2.0, 2.0]) * (1.0 / 3.0);
    let g = grid(4);
    for model in common::all_models(3) {
        let o = model.origin();
        let center = model.geodesic(&o, &o.tangent(v).unit().unwrap(), 0.25).unwrap();
        let s = RadialSurface::at(model, center, SurfaceFamily::GeodesicSphere { radius: 0.7 }).unwrap();
        let mp = MovingPlanes::new(&s, &g, &Tolerances::default()).unwrap();
        let result = mp.critical_cap(&v).unwrap();
        assert!((result.m - 0.25).abs() <= mp.position_tolerance(), "{model:?}: m = {}", result.m);
        assert!(result.plane.distance_to(&center) <= 1e-6);
        assert!(result.defect <= 1e-7, "{model:?}: defect {}", result.defect);
        assert!(result.monotone);
        assert!(result.warnings.is_empty(), "{:?}", result.warnings);
        let p0_sigma = leaf_coordinate(&model, &v, &result.tangency_point).unwrap();
        assert!(p0_sigma <= result.m + 1e-12);
    }
}

#[test]
fn reflected_cap_is_inside_just_above_and_outside_just_below() {
    let g = grid(4);
    let v = Vector::basis(3, 0);
    for model in common::all_models(3) {
        let s = perturbed(model, 0.1);
        let mp = MovingPlanes::new(&s, &g, &Tolerances::default()).unwrap();
        let pos = mp.critical_position(&v).unwrap();
        let step = 10.0 * mp.position_tolerance();
        let above = mp.reflected_margins(&v, pos.m + step).unwrap();
        let below = mp.reflected_margins(&v, pos.m - step).unwrap();
        let least_above = above.iter().copied().fold(f64::INFINITY, f64::min);
        assert!(least_above > 0.0, "{model:?}: {least_above}");
        assert!(below.iter().any(|&m| m < 0.0), "{model:?}");
        assert!(pos.monotone);
    }
}

#[test]
fn critical_positions_are_equivariant() {
    let g = grid(4);
    let v = Vector::basis(3, 0);
    let w = Vector::from_slice(&[0.0, 0.6, 0.8]);
    for model in common::all_models(3) {
        let s = perturbed(model, 0.1);
        // Reflection through the hyperplane at the origin swapping v and w.
        let axis = model.ambient_direction(&(v - w));
        let phi = ChartIsometry::new(model, vec![IsometryStep::Reflection(model.leaf_hyperplane(&axis, 0.0))]).unwrap();
        let moved = RadialSurface::new(
            model,
            phi.apply(&s.base).unwrap(),
            s.frame.iter().map(|e| phi.push(e).unwrap()).collect(),
            s.family.clone(),
        )
        .unwrap();
        let tol = Tolerances::default();
        let a = MovingPlanes::new(&s, &g, &tol).unwrap();
        let b = MovingPlanes::new(&moved, &g, &tol).unwrap();
        let ra = a.critical_cap(&v).unwrap();
        let rb = b.critical_cap(&w).unwrap();
        assert!((ra.m - rb.m).abs() <= 2.0 * a.position_tolerance(), "{model:?}: {} vs {}", ra.m, rb.m);
        assert!((ra.defect - rb.defect).abs() <= 1e-5, "{model:?}: {} vs {}", ra.defect, rb.defect);
    }
}

#[test]
fn concentric_hyperbolic_spheres_project_along_radial_geodesics() {
    let h = SpaceForm::hyperbolic(3);
    let s = RadialSurface::centered(h, SurfaceFamily::GeodesicSphere { radius: 1.0 }).unwrap();
    let inner = RadialSurface::centered(h, SurfaceFamily::GeodesicSphere { radius: 0.99 }).unwrap();
    for u in alexandrov_core::hypersurface::fibonacci_directions(3, 20).unwrap() {
        let sample = inner.principal_curvatures(&u).unwrap();
        let m = inner_projection(&s, &sample.point, &sample.normal).unwrap();
        assert!((m.distance - 0.01).abs() <= 1e-6, "{}", m.distance);
        assert!(m.normal_gap <= 1e-8, "{}", m.normal_gap);
    }
}

#[test]
fn defect_vanishes_with_the_perturbation() {
    let g = grid(4);
    let v = Vector::basis(3, 0);
    let tol = Tolerances::default();
    let mut rows = Vec::new();
    for eps in [0.04, 0.02, 0.01] {
        let s = perturbed(SpaceForm::euclidean(3), eps);
        let mp = MovingPlanes::new(&s, &g, &tol).unwrap();
        let r = mp.critical_cap(&v).unwrap();
        assert!(r.defect > 0.0);
        rows.push((eps, r.defect));
    }
    assert!(rows[0].1 > rows[1].1 && rows[1].1 > rows[2].1, "{rows:?}");
    let lipschitz = rows
        .windows(2)
        .map(|w| (w[0].1 - w[1].1).abs() / (w[0].0 - w[1].0))
        .fold(0.0, f64::max);
    eprintln!("defects {rows:?}, empirical Lipschitz constant {lipschitz:.4}");
    assert!(lipschitz.is_finite());
}

#[test]
fn spheroid_defect_is_positive_off_the_symmetry_planes() {
    let s = RadialSurface::centered(SpaceForm::euclidean(3), SurfaceFamily::spheroid(3, 0.05)).unwrap();
    let g = grid(4);
    let mp = MovingPlanes::new(&s, &g, &Tolerances::default()).unwrap();
    let symmetric = mp.critical_cap(&Vector::basis(3, 1)).unwrap();
    let tilted = mp.critical_cap(&Vector::from_slice(&[1.0, 1.0, 0.0])).unwrap();
    eprintln!("spheroid defects: e2 {:.3e}, tilted {:.3e}", symmetric.defect, tilted.defect);
    assert!(symmetric.m.abs() <= mp.position_tolerance());
    assert!(tilted.defect > 1e-4);
    let json = serde_json::to_string(&tilted.record()).unwrap();
    assert!(json.contains("\"m_v\""));
}
