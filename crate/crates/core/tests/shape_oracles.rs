use std::f64::consts::PI;
use std::sync::Arc;

use captension_core::disk_field::{
    evaluate_at, gradient, jacobian_det, restrict_boundary, sobolev_norm_boundary, sobolev_norm_disk,
    BoundaryFunction, DiskGrid, DiskMap, MapKind,
};
use captension_core::shape::*;
use captension_core::Tolerances;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn grid() -> Arc<DiskGrid> {
    DiskGrid::new(32, 16).unwrap()
}

/// Wider admissible ball for the finite-amplitude mode-2 examples.
fn wide() -> Tolerances {
    Tolerances {
        delta0: 2.0,
        ..Tolerances::default()
    }
}

fn potential(g: &Arc<DiskGrid>, m: usize, amp: f64) -> VolumePotential {
    let h = BoundaryFunction::from_fn(g, |t| amp * (m as f64 * t).cos());
    solve_volume_constraint(g, &h, &wide()).unwrap()
}

fn random_admissible(g: &Arc<DiskGrid>, rng: &mut ChaCha8Rng, bound: f64) -> BoundaryFunction {
    let mut cos = vec![0.0; 7];
    let mut sin = vec![0.0; 7];
    for m in 1..7 {
        cos[m] = rng.gen_range(-1.0..1.0) / (m * m * m) as f64;
        sin[m] = rng.gen_range(-1.0..1.0) / (m * m * m) as f64;
    }
    let h = BoundaryFunction::from_trig(g.n_theta(), &cos, &sin);
    let n = sobolev_norm_boundary(&h, 2.5);
    h.scale(bound * rng.gen_range(0.2..1.0) / n)
}

/// Point `theta -> e^{i theta} + grad f(e^{i theta})` by spectral interpolation.
fn curve_points(p: &VolumePotential, thetas: &[f64]) -> Vec<[f64; 2]> {
    let g = gradient(&p.f);
    let pts: Vec<[f64; 2]> = thetas.iter().map(|t| [t.cos(), t.sin()]).collect();
    let gx = evaluate_at(&g.x, &pts).unwrap();
    let gy = evaluate_at(&g.y, &pts).unwrap();
    pts.iter()
        .enumerate()
        .map(|(i, q)| [q[0] + gx[i], q[1] + gy[i]])
        .collect()
}

#[test]
fn mode_two_potential_has_unit_jacobian() {
    let g = grid();
    let p = potential(&g, 2, 0.05);
    let id_plus = DiskMap::new(gradient(&p.f), MapKind::Embedding);
    assert!(jacobian_det(&id_plus).map(|v| v - 1.0).max_abs() < 1e-7);
    assert!(p.residual < 1e-9);
    let trace = restrict_boundary(&p.f);
    assert!((&trace - &p.boundary_data).max_abs_coefficient() < 1e-10);
}

#[test]
fn random_admissible_data_satisfy_constraint() {
    let g = grid();
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let h = random_admissible(&g, &mut rng, tol.delta0 / 2.0);
        let p = solve_volume_constraint(&g, &h, &tol).unwrap();
        let j = jacobian_det(&p.map());
        assert!(j.map(|v| v - 1.0).max_abs() < 1e-7);
        assert!((&restrict_boundary(&p.f) - &h).max_abs_coefficient() < 1e-10);
        assert!(p.residual < tol.tol_vol);
    }
}

#[test]
fn solution_map_is_lipschitz() {
    let g = grid();
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut ratios = Vec::new();
    for scale in [1.0, 0.5, 0.25] {
        let h1 = random_admissible(&g, &mut rng, scale * tol.delta0 / 2.0);
        let h2 = random_admissible(&g, &mut rng, scale * tol.delta0 / 2.0);
        let f1 = solve_volume_constraint(&g, &h1, &tol).unwrap().f;
        let f2 = solve_volume_constraint(&g, &h2, &tol).unwrap().f;
        let num = sobolev_norm_disk(&(&f1 - &f2), 1).unwrap();
        let den = sobolev_norm_boundary(&(&h1 - &h2), 0.5);
        ratios.push(num / den);
    }
    let max = ratios.iter().cloned().fold(0.0, f64::max);
    let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(max < 10.0 && max / min < 3.0, "{ratios:?}");
}

#[test]
fn curvature_matches_finite_differences() {
    let g = grid();
    let p = potential(&g, 2, 0.05);
    let k = curvature_exact(&p).unwrap().samples(&g);
    let d = 1e-3;
    for (j, t) in g.theta().iter().enumerate() {
        let ts: Vec<f64> = (-2..=2).map(|s| t + s as f64 * d).collect();
        let x = curve_points(&p, &ts);
        let d1 = |c: usize| (x[0][c] - 8.0 * x[1][c] + 8.0 * x[3][c] - x[4][c]) / (12.0 * d);
        let d2 = |c: usize| {
            (-x[0][c] + 16.0 * x[1][c] - 30.0 * x[2][c] + 16.0 * x[3][c] - x[4][c]) / (12.0 * d * d)
        };
        let (a, b) = ([d1(0), d1(1)], [d2(0), d2(1)]);
        let kappa = (a[0] * b[1] - a[1] * b[0]) / a[0].hypot(a[1]).powi(3);
        assert!((kappa - k[j]).abs() < 1e-6, "{kappa} vs {}", k[j]);
    }
}

#[test]
fn length_matches_dense_polygon() {
    let g = grid();
    let p = potential(&g, 2, 0.05);
    let polygon = |n: usize| {
        let ts: Vec<f64> = (0..=n).map(|i| 2.0 * PI * i as f64 / n as f64).collect();
        let x = curve_points(&p, &ts);
        x.windows(2).map(|w| (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1])).sum::<f64>()
    };
    // Richardson extrapolation removes the O(n^-2) chord error.
    let (a, b) = (polygon(4000), polygon(8000));
    let oracle = (4.0 * b - a) / 3.0;
    let len = boundary_length(&p).unwrap();
    assert!(len > 2.0 * PI);
    assert!((len - oracle).abs() < 1e-9, "{len} vs {oracle}");
}

#[test]
fn expansion_is_exact() {
    let g = grid();
    for (m, amp) in [(3, 0.03), (2, 0.05), (4, 0.01)] {
        let p = potential(&g, m, amp);
        let e = curvature_expansion(&p).unwrap();
        let k = curvature_exact(&p).unwrap().samples(&g);
        let m5 = e.m5.samples(&g);
        for (a, b) in m5.iter().zip(&k) {
            assert!((a + 1.0 - b).abs() < 1e-9);
            assert!(1.0 + a > 0.0);
        }
    }
}

#[test]
fn normal_is_unit_and_orthogonal() {
    let g = grid();
    let p = potential(&g, 3, 0.02);
    let n = boundary_normal(&p).unwrap();
    let geo = boundary_geometry(&p).unwrap();
    for (nj, tj) in n.iter().zip(&geo.d1) {
        assert!((nj[0].hypot(nj[1]) - 1.0).abs() < 1e-10);
        assert!((nj[0] * tj[0] + nj[1] * tj[1]).abs() < 1e-9);
    }
}

#[test]
fn enclosed_area_is_preserved() {
    let g = grid();
    for (m, amp) in [(2, 0.05), (3, 0.03)] {
        let p = potential(&g, m, amp);
        assert!((enclosed_area(&p).unwrap() - PI).abs() < 1e-8);
    }
}

#[test]
fn harmonic_curvature_matches_polynomial_fit() {
    let g = grid();
    let p = potential(&g, 2, 0.05);
    let kappa = curvature_exact(&p).unwrap();
    let n_pts = 160;
    let deg = 16;
    let ts: Vec<f64> = (0..n_pts).map(|i| 2.0 * PI * i as f64 / n_pts as f64).collect();
    let x = curve_points(&p, &ts);
    let mut a = DMatrix::zeros(n_pts, 2 * deg + 1);
    let mut rhs = DVector::zeros(n_pts);
    for (i, q) in x.iter().enumerate() {
        let z = num_complex::Complex64::new(q[0], q[1]);
        a[(i, 0)] = 1.0;
        for n in 1..=deg {
            let zn = z.powu(n as u32);
            a[(i, 2 * n - 1)] = zn.re;
            a[(i, 2 * n)] = zn.im;
        }
        rhs[i] = kappa.evaluate(ts[i]) - 1.0;
    }
    let coef = a.svd(true, true).solve(&rhs, 1e-14).unwrap();
    let grad = harmonic_curvature_gradient(&p, &Tolerances::default()).unwrap();
    let image = p.map().points();
    for (idx, y) in image.iter().enumerate() {
        let z = num_complex::Complex64::new(y[0], y[1]);
        let (mut gx, mut gy) = (0.0, 0.0);
        for n in 1..=deg {
            let dz = z.powu(n as u32 - 1) * n as f64;
            let (c, s) = (coef[2 * n - 1], coef[2 * n]);
            gx += c * dz.re + s * dz.im;
            gy += -c * dz.im + s * dz.re;
        }
        let (i, j) = (idx / g.n_theta(), idx % g.n_theta());
        assert!((grad.x.values()[[i, j]] - gx).abs() < 1e-5);
        assert!((grad.y.values()[[i, j]] - gy).abs() < 1e-5);
    }
}

#[test]
fn decompose_rotation() {
    let g = grid();
    let rot = DiskMap::rotation(&g, 0.6);
    let fac = decompose_embedding(&rot, &Tolerances::default()).unwrap();
    assert!(fac.potential.f.max_abs() < 1e-9);
    assert!((fac.beta.displacement() - rot.displacement()).max_abs() < 1e-9);
}

#[test]
fn decompose_translated_rotation() {
    let g = grid();
    let eps = 0.01;
    let rot = DiskMap::rotation(&g, -0.3);
    let eta = DiskMap::from_points(
        &g,
        &rot.points().iter().map(|p| [p[0] + eps, p[1]]).collect::<Vec<_>>(),
        MapKind::Embedding,
    );
    let fac = decompose_embedding(&eta, &Tolerances::default()).unwrap();
    let exact = BoundaryFunction::from_fn(&g, |t| eps * t.cos());
    assert!((&fac.potential.boundary_data - &exact).max_abs_coefficient() < 1e-10);
    assert!((fac.beta.displacement() - rot.displacement()).max_abs() < 1e-9);
}

#[test]
fn decompose_compose_roundtrip() {
    let g = grid();
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..4 {
        let h = random_admissible(&g, &mut rng, tol.delta0 / 2.0);
        let pot = solve_volume_constraint(&g, &h, &tol).unwrap();
        let eps = rng.gen_range(-0.2..0.2);
        let alpha = rng.gen_range(-1.0..1.0);
        let beta = swirl(&g, eps).after(&DiskMap::rotation(&g, alpha)).unwrap();
        let eta = compose_phi(&beta, &pot).unwrap();
        let fac = decompose_embedding(&eta, &tol).unwrap();
        assert!((&fac.potential.f - &pot.f).max_abs() < 1e-7);
        assert!((fac.beta.displacement() - beta.displacement()).max_abs() < 1e-7);
        assert!(jacobian_det(&fac.beta).map(|v| v - 1.0).max_abs() < 1e-6);
    }
}

fn swirl(g: &Arc<DiskGrid>, eps: f64) -> DiskMap {
    let pts: Vec<[f64; 2]> = g
        .nodes()
        .iter()
        .map(|p| {
            let r2 = p[0] * p[0] + p[1] * p[1];
            let a = eps * (1.0 - r2) * (1.0 - r2);
            let (s, c) = a.sin_cos();
            [c * p[0] - s * p[1], s * p[0] + c * p[1]]
        })
        .collect();
    DiskMap::from_points(g, &pts, MapKind::Diffeomorphism)
}

#[test]
fn static_zero_field_has_zero_curvature_gradient() {
    let g = grid();
    let zero = VolumePotential::zero(&g);
    assert!(harmonic_curvature_gradient(&zero, &Tolerances::default()).unwrap().max_abs() < 1e-12);
}
