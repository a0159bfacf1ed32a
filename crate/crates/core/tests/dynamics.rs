use std::f64::consts::PI;
use std::sync::Arc;

use captension_core::disk_field::*;
use captension_core::dynamics::*;
use captension_core::Tolerances;

fn grid() -> Arc<DiskGrid> {
    DiskGrid::new(32, 16).unwrap()
}

#[test]
fn rest_state_is_stationary() {
    let g = grid();
    let s = FreeBoundaryState::at_rest(&g, 100.0);
    let r = rhs_free_boundary(&s, Closure::Complete, &Tolerances::default()).unwrap();
    assert!(r.fddot.max_abs() < 1e-12 && r.vdot.max_abs() < 1e-12);
    let dt = dt_max(100.0, 32, 0.5);
    let next = step_free_boundary(&s, dt, &StepOptions::default()).unwrap();
    assert!(next.f.max_abs() < 1e-12);
    assert!(next.fdot.max_abs() < 1e-12);
    assert!(next.v.max_abs() < 1e-12);
    assert!(next.beta.displacement().max_abs() < 1e-12);
}

#[test]
fn rigid_rotation_pressure() {
    let g = grid();
    let s = FreeBoundaryState::initial(&solid_rotation(&g), 10.0);
    let p = pressure_solve(&s, &Tolerances::default()).unwrap();
    let q0 = ScalarField::from_fn(&g, |x, y| 0.5 * (x * x + y * y - 1.0));
    assert!((&p.q0 - &q0).max_abs() < 1e-10);
    assert!(p.ah_hat.max_abs() < 1e-12);
    let xy = VectorField::from_fn(&g, |x, y| [x, y]);
    assert!((&p.grad_p_pullback - &xy).max_abs() < 1e-10);
}

#[test]
fn rigid_rotation_is_steady() {
    let g = grid();
    let s = FreeBoundaryState::initial(&solid_rotation(&g), 10.0);
    let r = rhs_free_boundary(&s, Closure::Complete, &Tolerances::default()).unwrap();
    assert!(r.fddot.max_abs() < 1e-10, "{}", r.fddot.max_abs());
    assert!(r.vdot.max_abs() < 1e-10, "{}", r.vdot.max_abs());
}

#[test]
fn printed_closure_moves_rigid_rotation() {
    let g = grid();
    let s = FreeBoundaryState::initial(&solid_rotation(&g), 10.0);
    let r = rhs_free_boundary(&s, Closure::AsPrinted, &Tolerances::default()).unwrap();
    assert!(r.fddot.max_abs() > 0.1);
}

#[test]
fn generic_rates_are_gradients() {
    let g = grid();
    let mut s = FreeBoundaryState::initial(&stream_velocity_field(&g, 0.5, 2), 100.0);
    let h = BoundaryFunction::from_fn(&g, |t| 0.002 * (2.0 * t).cos() + 0.001 * (3.0 * t).sin());
    s.f = captension_core::shape::solve_volume_constraint(&g, &h, &Tolerances::default()).unwrap().f;
    s.fdot = harmonic_extension(&g, &BoundaryFunction::from_fn(&g, |t| 0.01 * (2.0 * t).sin()));
    let r = rhs_free_boundary(&s, Closure::Complete, &Tolerances::default()).unwrap();
    assert!(r.gradient_consistency < 1e-6, "{}", r.gradient_consistency);
}

#[test]
fn energy_examples() {
    let g = grid();
    let rest = energy_report(&FreeBoundaryState::at_rest(&g, 3.0)).unwrap();
    assert_eq!(rest.kinetic, 0.0);
    assert!(rest.potential.abs() < 1e-12);
    assert!((rest.e_tilde - 2.0 * PI * 3.0).abs() < 1e-12);
    let rot = energy_report(&FreeBoundaryState::initial(&solid_rotation(&g), 3.0)).unwrap();
    assert!((rot.total - PI / 4.0).abs() < 1e-12);
}

#[test]
fn reconstruct_examples() {
    let g = grid();
    let (eta, etadot) = reconstruct_eta(&FreeBoundaryState::at_rest(&g, 1.0)).unwrap();
    assert_eq!(eta.displacement().max_abs(), 0.0);
    assert_eq!(etadot.max_abs(), 0.0);
    let mut s = FreeBoundaryState::initial(&solid_rotation(&g), 1.0);
    s.beta = DiskMap::rotation(&g, 0.4);
    let (eta, etadot) = reconstruct_eta(&s).unwrap();
    assert!((eta.displacement() - DiskMap::rotation(&g, 0.4).displacement()).max_abs() < 1e-14);
    let (sn, cs) = 0.4f64.sin_cos();
    let exact = VectorField::from_fn(&g, |x, y| [-(sn * x + cs * y), cs * x - sn * y]);
    assert!((&etadot - &exact).max_abs() < 1e-12);
}
