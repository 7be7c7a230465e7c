mod common;

use common::{bessel_j, bessel_zero, tm010, J01, J11};
use qpack_lab::cavity::{export_mode_field, solve_modes, SolverConfig};
use qpack_lab::field::{load_field_grid, CavityGeometry, MaterialTable, Pillar, Point2};

fn bare(radius: f64) -> CavityGeometry {
    CavityGeometry::bare_disc(radius, radius / 50.0).unwrap()
}

#[test]
fn oracle_bessel_zeros() {
    assert!((bessel_zero(0, 2.0, 3.0) - J01).abs() < 1e-12);
    assert!((bessel_zero(1, 3.0, 4.5) - J11).abs() < 1e-12);
    assert!(bessel_j(0, J01).abs() < 1e-14);
}

#[test]
fn unit_disc_fundamental_matches_bessel() {
    let spec = solve_modes(&bare(1.0), &MaterialTable::bundled(), &SolverConfig::new(0.01, 4)).unwrap();
    let f = spec.frequencies();
    let expected = tm010(1.0, 1.0);
    assert!((expected - 114.76e6).abs() < 0.05e6);
    assert!((f[0] / expected - 1.0).abs() < 1e-2, "{} vs {expected}", f[0]);
    // TM110 doublet
    let ratio = J11 / J01;
    assert!((f[1] / f[0] - ratio).abs() < 5e-3 * ratio);
    assert!((f[2] / f[1] - 1.0).abs() < 1e-6);
    assert_eq!(spec.groups[1], spec.groups[2]);
    assert_ne!(spec.groups[0], spec.groups[1]);
}

#[test]
fn wafer_package_fundamental() {
    let a = 47.3e-3;
    let spec = solve_modes(&bare(a), &MaterialTable::bundled(), &SolverConfig::new(a / 100.0, 1)).unwrap();
    let f = spec.frequencies()[0];
    assert!((tm010(a, 1.0) - 2.43e9).abs() < 0.01e9);
    assert!((f / tm010(a, 1.0) - 1.0).abs() < 1e-2);
}

#[test]
fn mesh_convergence_and_order() {
    let g = bare(1.0);
    let exact = tm010(1.0, 1.0);
    let solve = |h: f64| solve_modes(&g, &MaterialTable::bundled(), &SolverConfig::new(h, 1)).unwrap().frequencies()[0];
    let (f1, f2, f4) = (solve(0.04), solve(0.02), solve(0.01));
    assert!((f4 / f2 - 1.0).abs() < 1e-2);
    let e = |f: f64| (f - exact).abs();
    let order = (e(f1) / e(f4)).log2() / 2.0;
    assert!(order >= 1.0, "observed order {order} errors {} {} {}", e(f1), e(f2), e(f4));
}

#[test]
fn modes_are_orthogonal_and_normalized() {
    let spec = solve_modes(&bare(1.0), &MaterialTable::bundled(), &SolverConfig::new(0.02, 8)).unwrap();
    for m in &spec.modes {
        assert!((m.stored_energy - 1.0).abs() < 1e-9);
    }
    for i in 0..spec.modes.len() {
        for j in 0..i {
            let (a, b) = (spec.shape(i), spec.shape(j));
            let ip: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
            assert!(ip.abs() < 1e-6, "modes {i},{j}: {ip}");
        }
    }
}

#[test]
fn pillar_raises_fundamental() {
    let g = bare(1.0);
    let t = MaterialTable::bundled();
    let cfg = SolverConfig::new(0.02, 1);
    let f0 = solve_modes(&g, &t, &cfg).unwrap().frequencies()[0];
    let pg = g
        .with_pillars(vec![Pillar {
            center: Point2::new(0.2, -0.1).unwrap(),
            radius: 0.1,
        }])
        .unwrap();
    let f1 = solve_modes(&pg, &t, &cfg).unwrap().frequencies()[0];
    assert!(f1 > f0);
}

#[test]
fn export_round_trip_and_energy() {
    let spec = solve_modes(&bare(1.0), &MaterialTable::bundled(), &SolverConfig::new(0.02, 1)).unwrap();
    let mode = &spec.modes[0];
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.txt");
    export_mode_field(mode, &path).unwrap();
    let back = load_field_grid(&path).unwrap();
    let e = back.total_energy().unwrap();
    assert!((e - 1.0).abs() < 1e-9);
    assert_eq!(&back, &mode.field);
    let doubled = qpack_lab::field::ModeSolution {
        field: mode.field.scaled(2.0),
        ..mode.clone()
    };
    assert!(export_mode_field(&doubled, &path).is_err());
}
