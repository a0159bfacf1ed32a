//! Boundary shape: the volume-constraint potential `f = phi(h)`, the
//! factorization `eta = (id + grad f) o beta`, and curvature of the
//! deformed boundary curve `theta -> e^{i theta} + grad f(1, theta)`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::disk_field::calculus::ring_derivative;
use crate::disk_field::{
    compose_vector, gradient, harmonic_extension, hessian, restrict_boundary, solve_dirichlet,
    sobolev_norm_boundary, sobolev_norm_disk, BoundaryFunction, DiskGrid, DiskMap, MapKind,
    ScalarField, VectorField,
};
use crate::error::{Error, Result};
use crate::projections::{solve_pulled_back_laplacian, PulledBackMetric};
use crate::quadrature::gauss_legendre;
use crate::tolerances::Tolerances;

/// Solution of `lap f + det D^2 f = 0`, `f = h` on the circle.
#[derive(Debug, Clone)]
pub struct VolumePotential {
    pub f: ScalarField,
    pub boundary_data: BoundaryFunction,
    /// Max norm of `lap f + det D^2 f` over all nodes.
    pub residual: f64,
    pub iterations: usize,
    /// `||f||_3 / ||h||_{5/2}`, a measured elliptic constant (0 for `h = 0`).
    pub elliptic_ratio: f64,
}

impl VolumePotential {
    pub fn zero(grid: &Arc<DiskGrid>) -> Self {
        Self {
            f: ScalarField::zeros(grid),
            boundary_data: BoundaryFunction::zeros(grid.n_theta()),
            residual: 0.0,
            iterations: 0,
            elliptic_ratio: 0.0,
        }
    }

    pub fn grid(&self) -> &Arc<DiskGrid> {
        self.f.grid()
    }

    /// `eta~ = id + grad f` as an embedding.
    pub fn map(&self) -> DiskMap {
        DiskMap::new(gradient(&self.f), MapKind::Embedding)
    }
}

const VOLUME_MAX_ITER: usize = 200;

/// Fixed-point solve of the volume constraint:
/// `f <- -lap_0^-1 (det D^2 f) + H(h)`.
pub fn solve_volume_constraint(
    grid: &Arc<DiskGrid>,
    h: &BoundaryFunction,
    tol: &Tolerances,
) -> Result<VolumePotential> {
    let h = h.resized(grid.n_theta());
    let norm = sobolev_norm_boundary(&h, 2.5);
    if norm >= tol.delta0 {
        return Err(Error::OutsideAdmissibleBall {
            norm,
            bound: tol.delta0,
        });
    }
    solve_volume_unchecked(grid, &h, tol)
}

pub(crate) fn solve_volume_unchecked(
    grid: &Arc<DiskGrid>,
    h: &BoundaryFunction,
    tol: &Tolerances,
) -> Result<VolumePotential> {
    let h = h.resized(grid.n_theta());
    let harmonic = harmonic_extension(grid, &h);
    let zero = BoundaryFunction::zeros(grid.n_theta());
    let mut f = harmonic.clone();
    let mut last_step = f64::INFINITY;
    let mut growth = 0;
    let mut iterations = 0;
    for it in 1..=VOLUME_MAX_ITER {
        iterations = it;
        let det = hessian(&f).determinant();
        let next = &harmonic - &solve_dirichlet(&det, &zero)?;
        let step = (&next - &f).max_abs();
        f = next;
        let scale = 1.0f64.max(f.max_abs());
        if step <= 4.0 * f64::EPSILON * scale {
            break;
        }
        if !step.is_finite() {
            growth = usize::MAX;
            break;
        }
        if step >= last_step {
            growth += 1;
            if growth >= 3 {
                break;
            }
        } else {
            growth = 0;
        }
        last_step = step;
    }
    let residual = volume_residual(&f);
    if growth > 0 && residual > tol.tol_vol || !residual.is_finite() || residual > tol.tol_vol {
        return Err(Error::NoConvergence {
            what: "volume constraint",
            iterations,
            residual,
        });
    }
    let hn = sobolev_norm_boundary(&h, 2.5);
    let elliptic_ratio = if hn > 0.0 {
        sobolev_norm_disk(&f, 3)? / hn
    } else {
        0.0
    };
    Ok(VolumePotential {
        f,
        boundary_data: h,
        residual,
        iterations,
        elliptic_ratio,
    })
}

/// `max |lap f + det D^2 f|`, equal to `max |J(id + grad f) - 1|` node-wise.
pub fn volume_residual(f: &ScalarField) -> f64 {
    let h = hessian(f);
    (&h.trace() + &h.determinant()).max_abs()
}

/// `Phi(beta, f) = (id + grad f) o beta`.
pub fn compose_phi(beta: &DiskMap, pot: &VolumePotential) -> Result<DiskMap> {
    let grad = gradient(&pot.f);
    let moved = compose_vector(&grad, beta)?;
    Ok(DiskMap::new(beta.displacement() + &moved, MapKind::Embedding))
}

#[derive(Debug, Clone)]
pub struct Factorization {
    pub beta: DiskMap,
    pub potential: VolumePotential,
    /// Max node-wise distance between `Phi(beta, f)` and the source embedding.
    pub reproduction_error: f64,
}

/// Closed curve given by Fourier series of its two components.
#[derive(Debug, Clone)]
struct RingCurve {
    x: BoundaryFunction,
    y: BoundaryFunction,
    dx: BoundaryFunction,
    dy: BoundaryFunction,
    samples: Vec<[f64; 2]>,
}

impl RingCurve {
    fn new(grid: &DiskGrid, xs: &[f64], ys: &[f64]) -> Self {
        let x = BoundaryFunction::from_samples(grid, xs);
        let y = BoundaryFunction::from_samples(grid, ys);
        Self {
            dx: x.derivative(),
            dy: y.derivative(),
            x,
            y,
            samples: xs.iter().zip(ys).map(|(a, b)| [*a, *b]).collect(),
        }
    }

    /// Radius of the curve where it crosses the ray at polar angle `phi`.
    fn radius_at_angle(&self, phi: f64, n: usize) -> Result<f64> {
        let wrap = |a: f64| (a + PI).rem_euclid(2.0 * PI) - PI;
        let (j0, _) = self
            .samples
            .iter()
            .enumerate()
            .map(|(j, p)| (j, wrap(p[1].atan2(p[0]) - phi).abs()))
            .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        let mut s = 2.0 * PI * j0 as f64 / n as f64;
        for _ in 0..60 {
            let (px, py) = (self.x.evaluate(s), self.y.evaluate(s));
            let (qx, qy) = (self.dx.evaluate(s), self.dy.evaluate(s));
            let g = wrap(py.atan2(px) - phi);
            let dg = (px * qy - py * qx) / (px * px + py * py);
            if dg <= 0.0 {
                break;
            }
            let ds = g / dg;
            s -= ds;
            if ds.abs() < 1e-15 {
                return Ok(self.x.evaluate(s).hypot(self.y.evaluate(s)));
            }
        }
        Err(Error::NoConvergence {
            what: "polar angle matching",
            iterations: 60,
            residual: phi,
        })
    }

    fn radial_function(&self, grid: &DiskGrid) -> Result<Vec<f64>> {
        grid.theta()
            .iter()
            .map(|phi| self.radius_at_angle(*phi, grid.n_theta()))
            .collect()
    }
}

fn boundary_curve_of(grid: &DiskGrid, grad_f: &VectorField) -> RingCurve {
    let bx = grad_f.x.boundary_samples();
    let by = grad_f.y.boundary_samples();
    let xs: Vec<f64> = (0..grid.n_theta()).map(|j| grid.cos_theta()[j] + bx[j]).collect();
    let ys: Vec<f64> = (0..grid.n_theta()).map(|j| grid.sin_theta()[j] + by[j]).collect();
    RingCurve::new(grid, &xs, &ys)
}

const DECOMPOSE_MAX_ITER: usize = 100;

/// Recovers `(beta, f)` with `eta = (id + grad f) o beta`.
///
/// The boundary data `h` is found by matching the radial functions (radius
/// against polar angle) of the two boundary curves with the quasi-Newton
/// update `h_m -= R_m / |m|` (the linearized map sends `h` to the normal
/// derivative of its harmonic extension). `beta` then follows from pointwise
/// Newton inversion of `id + grad f`.
pub fn decompose_embedding(eta: &DiskMap, tol: &Tolerances) -> Result<Factorization> {
    let grid = eta.grid().clone();
    let n = grid.n_theta();
    let nm = grid.n_modes();
    let last = (grid.n_r() - 1) * n;
    let pts = eta.points();
    let ring = &pts[last..];
    let target = RingCurve::new(
        &grid,
        &ring.iter().map(|p| p[0]).collect::<Vec<_>>(),
        &ring.iter().map(|p| p[1]).collect::<Vec<_>>(),
    )
    .radial_function(&grid)?;

    let mut h = vec![Complex64::new(0.0, 0.0); nm + 1];
    let mut pot = VolumePotential::zero(&grid);
    let mut best = f64::INFINITY;
    let mut stalls = 0;
    for it in 0..DECOMPOSE_MAX_ITER {
        let current = boundary_curve_of(&grid, &gradient(&pot.f)).radial_function(&grid)?;
        let diff: Vec<f64> = current.iter().zip(&target).map(|(a, b)| a - b).collect();
        let r = grid.forward_ring(&diff);
        let res = r.iter().skip(1).fold(0.0f64, |m, c| m.max(c.norm()));
        if res <= 1e-15 {
            break;
        }
        if res < 0.9 * best {
            best = res;
            stalls = 0;
        } else {
            stalls += 1;
            if stalls >= 3 {
                break;
            }
        }
        for m in 1..=nm {
            h[m] -= r[m] / m as f64;
        }
        let hb = BoundaryFunction::from_coefficients(h.clone())?;
        pot = solve_volume_unchecked(&grid, &hb, tol).map_err(|e| match e {
            Error::NoConvergence { residual, .. } => Error::NoConvergence {
                what: "embedding decomposition",
                iterations: it + 1,
                residual,
            },
            other => other,
        })?;
    }

    let eta_tilde = pot.map();
    let pre = eta_tilde.invert_points(&pts)?;
    let mut beta = DiskMap::from_points(&grid, &pre, MapKind::Diffeomorphism);
    beta.renormalize_boundary();
    let rebuilt = compose_phi(&beta, &pot)?;
    let reproduction_error = (rebuilt.displacement() - eta.displacement()).max_abs();
    if reproduction_error > tol.tol_fact {
        return Err(Error::FactorizationMismatch(format!(
            "reproduction error {reproduction_error:e} exceeds {:e}",
            tol.tol_fact
        )));
    }
    Ok(Factorization {
        beta,
        potential: pot,
        reproduction_error,
    })
}

/// Tangent data of the deformed boundary curve `X(theta)`.
#[derive(Debug, Clone)]
pub struct BoundaryGeometry {
    pub theta: Vec<f64>,
    /// `X'` and `X''` at the grid angles.
    pub d1: Vec<[f64; 2]>,
    pub d2: Vec<[f64; 2]>,
    pub speed: Vec<f64>,
}

const MIN_SPEED: f64 = 0.5;

pub fn boundary_geometry(pot: &VolumePotential) -> Result<BoundaryGeometry> {
    boundary_geometry_of(pot.grid(), &gradient(&pot.f))
}

pub fn boundary_geometry_of(grid: &DiskGrid, grad_f: &VectorField) -> Result<BoundaryGeometry> {
    let n = grid.n_theta();
    let bx = grad_f.x.boundary_samples();
    let by = grad_f.y.boundary_samples();
    let (c, s) = (grid.cos_theta(), grid.sin_theta());
    let dx1 = ring_derivative(grid, &bx, 1);
    let dy1 = ring_derivative(grid, &by, 1);
    let dx2 = ring_derivative(grid, &bx, 2);
    let dy2 = ring_derivative(grid, &by, 2);
    let d1: Vec<[f64; 2]> = (0..n).map(|j| [-s[j] + dx1[j], c[j] + dy1[j]]).collect();
    let d2: Vec<[f64; 2]> = (0..n).map(|j| [-c[j] + dx2[j], -s[j] + dy2[j]]).collect();
    geometry_from_derivatives(grid, d1, d2)
}

/// Geometry of an arbitrary closed curve sampled at the grid angles.
pub fn curve_geometry(grid: &DiskGrid, xs: &[f64], ys: &[f64]) -> Result<BoundaryGeometry> {
    let dx1 = ring_derivative(grid, xs, 1);
    let dy1 = ring_derivative(grid, ys, 1);
    let dx2 = ring_derivative(grid, xs, 2);
    let dy2 = ring_derivative(grid, ys, 2);
    let n = grid.n_theta();
    let d1 = (0..n).map(|j| [dx1[j], dy1[j]]).collect();
    let d2 = (0..n).map(|j| [dx2[j], dy2[j]]).collect();
    geometry_from_derivatives(grid, d1, d2)
}

fn geometry_from_derivatives(
    grid: &DiskGrid,
    d1: Vec<[f64; 2]>,
    d2: Vec<[f64; 2]>,
) -> Result<BoundaryGeometry> {
    let speed: Vec<f64> = d1.iter().map(|v| v[0].hypot(v[1])).collect();
    let min_speed = speed.iter().fold(f64::INFINITY, |m, v| m.min(*v));
    if !(min_speed > MIN_SPEED) {
        return Err(Error::DegenerateTangent { min_speed });
    }
    Ok(BoundaryGeometry {
        theta: grid.theta().to_vec(),
        d1,
        d2,
        speed,
    })
}

impl BoundaryGeometry {
    /// Signed curvature samples.
    pub fn curvature(&self) -> Vec<f64> {
        curvature_samples(self)
    }

    pub fn length(&self) -> f64 {
        2.0 * PI / self.speed.len() as f64 * self.speed.iter().sum::<f64>()
    }
}

/// Signed curvature of the deformed boundary, `+1` on the unit circle.
pub fn curvature_exact(pot: &VolumePotential) -> Result<BoundaryFunction> {
    let geo = boundary_geometry(pot)?;
    Ok(BoundaryFunction::from_samples(pot.grid(), &curvature_samples(&geo)))
}

pub(crate) fn curvature_samples(geo: &BoundaryGeometry) -> Vec<f64> {
    geo.d1
        .iter()
        .zip(&geo.d2)
        .zip(&geo.speed)
        .map(|((a, b), v)| (a[0] * b[1] - a[1] * b[0]) / (v * v * v))
        .collect()
}

/// Outward unit normal `N = J X' / |X'|`, `J(a, b) = (b, -a)`.
pub fn boundary_normal(pot: &VolumePotential) -> Result<Vec<[f64; 2]>> {
    let geo = boundary_geometry(pot)?;
    Ok(geo
        .d1
        .iter()
        .zip(&geo.speed)
        .map(|(d, v)| [d[1] / v, -d[0] / v])
        .collect())
}

/// Length of the deformed boundary, spectrally exact trapezoid sum of `|X'|`.
pub fn boundary_length(pot: &VolumePotential) -> Result<f64> {
    let geo = boundary_geometry(pot)?;
    Ok(2.0 * PI / geo.speed.len() as f64 * geo.speed.iter().sum::<f64>())
}

/// Area enclosed by the deformed boundary, `1/2 int X x X'`.
pub fn enclosed_area(pot: &VolumePotential) -> Result<f64> {
    let grid = pot.grid();
    let geo = boundary_geometry(pot)?;
    let g = gradient(&pot.f);
    let bx = g.x.boundary_samples();
    let by = g.y.boundary_samples();
    let n = grid.n_theta();
    let sum: f64 = (0..n)
        .map(|j| {
            let x = [grid.cos_theta()[j] + bx[j], grid.sin_theta()[j] + by[j]];
            x[0] * geo.d1[j][1] - x[1] * geo.d1[j][0]
        })
        .sum();
    Ok(0.5 * 2.0 * PI / n as f64 * sum)
}

/// Taylor-with-integral-remainder expansion of the boundary curvature.
#[derive(Debug, Clone)]
pub struct CurvatureExpansion {
    pub m0: BoundaryFunction,
    pub m1: BoundaryFunction,
    pub m2: BoundaryFunction,
    /// Vector-valued; Cartesian components.
    pub m3: [BoundaryFunction; 2],
    pub m4: BoundaryFunction,
    pub m5: BoundaryFunction,
}

const REMAINDER_NODES: usize = 20;

fn remainder(x: f64, g: impl Fn(f64) -> f64, nodes: &(Vec<f64>, Vec<f64>)) -> Result<f64> {
    if 1.0 + x <= 0.0 {
        return Err(Error::RemainderBlowup { value: 1.0 + x });
    }
    Ok(nodes.0.iter().zip(&nodes.1).map(|(t, w)| w * g(*t)).sum())
}

/// `M0 .. M5` with `curvature - 1 = M5`.
///
/// With `a = D_tau grad f` and `b = D_tau^2 grad f` on the circle:
/// `M0 = 2<a, tau> + |a|^2` so that `|X'|^2 = 1 + M0`;
/// `1 + M1 = 1 / (1 + M0)`; `M2 = <X', X''>`;
/// `M3 = M1 nu - (1 + M1) b + (1 + M1)^2 M2 X'` so that the curvature vector
/// is `nu + M3`; `M4 = 2<nu, M3> + |M3|^2`; `1 + M5 = sqrt(1 + M4)`.
pub fn curvature_expansion(pot: &VolumePotential) -> Result<CurvatureExpansion> {
    let grid = pot.grid();
    let geo = boundary_geometry(pot)?;
    let n = grid.n_theta();
    let q = gauss_legendre(REMAINDER_NODES, 0.0, 1.0);
    let (mut m0, mut m1, mut m2, mut m3x, mut m3y, mut m4, mut m5) = (
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
    );
    for j in 0..n {
        let (c, s) = (grid.cos_theta()[j], grid.sin_theta()[j]);
        let tau = [-s, c];
        let nu = [c, s];
        let xp = geo.d1[j];
        let a = [xp[0] - tau[0], xp[1] - tau[1]];
        let b = [geo.d2[j][0] + nu[0], geo.d2[j][1] + nu[1]];
        let dot = |u: [f64; 2], v: [f64; 2]| u[0] * v[0] + u[1] * v[1];
        let v0 = 2.0 * dot(a, tau) + dot(a, a);
        let r1 = remainder(v0, |t| 2.0 * (1.0 - t) / (1.0 + t * v0).powi(3), &q)?;
        let v1 = -v0 + v0 * v0 * r1;
        let v2 = -dot(nu, a) + dot(tau, b) + dot(b, a);
        let k1 = 1.0 + v1;
        let v3 = [
            v1 * nu[0] - k1 * b[0] + k1 * k1 * v2 * xp[0],
            v1 * nu[1] - k1 * b[1] + k1 * k1 * v2 * xp[1],
        ];
        let v4 = 2.0 * dot(nu, v3) + dot(v3, v3);
        let r5 = remainder(v4, |t| (1.0 - t) * (1.0 + t * v4).powf(-1.5), &q)?;
        let v5 = 0.5 * v4 - 0.25 * v4 * v4 * r5;
        m0[j] = v0;
        m1[j] = v1;
        m2[j] = v2;
        m3x[j] = v3[0];
        m3y[j] = v3[1];
        m4[j] = v4;
        m5[j] = v5;
    }
    let bf = |v: &[f64]| BoundaryFunction::from_samples(grid, v);
    Ok(CurvatureExpansion {
        m0: bf(&m0),
        m1: bf(&m1),
        m2: bf(&m2),
        m3: [bf(&m3x), bf(&m3y)],
        m4: bf(&m4),
        m5: bf(&m5),
    })
}

/// Solution `A_hat` of `Delta_eta~ A_hat = 0`, `A_hat = curvature - 1` on the
/// circle: the harmonic extension of the curvature, pulled back by `eta~`.
pub fn harmonic_curvature(pot: &VolumePotential, tol: &Tolerances) -> Result<ScalarField> {
    let grid = pot.grid();
    let kappa = curvature_exact(pot)?;
    let mut data = kappa.coefficients().to_vec();
    data[0] -= 1.0;
    let data = BoundaryFunction::from_coefficients(data)?;
    solve_pulled_back_laplacian(&pot.map(), &ScalarField::zeros(grid), &data, tol)
}

/// `(grad A_H) o eta~ = (D eta~)^-T grad A_hat`.
pub fn harmonic_curvature_gradient(pot: &VolumePotential, tol: &Tolerances) -> Result<VectorField> {
    let a_hat = harmonic_curvature(pot, tol)?;
    let metric = PulledBackMetric::new(&pot.map());
    Ok(metric.inverse_transpose_apply(&gradient(&a_hat)))
}

/// Trace of the potential, the boundary data it was built from.
pub fn potential_trace(pot: &VolumePotential) -> BoundaryFunction {
    restrict_boundary(&pot.f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Arc<DiskGrid> {
        DiskGrid::new(32, 16).unwrap()
    }

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn zero_data_gives_zero_potential() {
        let g = grid();
        let p = solve_volume_constraint(&g, &BoundaryFunction::zeros(32), &tol()).unwrap();
        assert_eq!(p.f.max_abs(), 0.0);
    }

    #[test]
    fn translation_data_gives_linear_potential() {
        let g = grid();
        let eps = 0.01;
        let h = BoundaryFunction::from_fn(&g, |t| eps * t.cos());
        let p = solve_volume_constraint(&g, &h, &tol()).unwrap();
        assert!((&p.f - &ScalarField::from_fn(&g, |x, _| eps * x)).max_abs() < 1e-14);
        assert!(p.residual < 1e-12);
    }

    #[test]
    fn rejects_data_outside_ball() {
        let g = grid();
        let h = BoundaryFunction::from_fn(&g, |t| 0.05 * (4.0 * t).cos());
        assert!(matches!(
            solve_volume_constraint(&g, &h, &tol()),
            Err(Error::OutsideAdmissibleBall { .. })
        ));
    }

    #[test]
    fn circle_and_translated_circle() {
        let g = grid();
        let zero = VolumePotential::zero(&g);
        let k = curvature_exact(&zero).unwrap();
        assert!(k.samples(&g).iter().all(|v| (v - 1.0).abs() < 1e-14));
        assert!((boundary_length(&zero).unwrap() - 2.0 * PI).abs() < 1e-13);
        let h = BoundaryFunction::from_fn(&g, |t| 0.02 * t.cos());
        let p = solve_volume_constraint(&g, &h, &tol()).unwrap();
        let k = curvature_exact(&p).unwrap();
        assert!(k.samples(&g).iter().all(|v| (v - 1.0).abs() < 1e-10));
        let e = curvature_expansion(&p).unwrap();
        eprintln!("{:e} {:e}", e.m0.max_abs_coefficient(), e.m5.max_abs_coefficient());
        assert!(e.m0.max_abs_coefficient() < 1e-12);
        assert!(e.m5.max_abs_coefficient() < 1e-12);
        let nrm = boundary_normal(&p).unwrap();
        for (j, n) in nrm.iter().enumerate() {
            assert!((n[0] - g.cos_theta()[j]).abs() < 1e-12);
            assert!((n[1] - g.sin_theta()[j]).abs() < 1e-12);
        }
        assert!(harmonic_curvature_gradient(&p, &tol()).unwrap().max_abs() < 1e-9);
    }

    #[test]
    fn compose_phi_examples() {
        let g = grid();
        let id = DiskMap::identity(&g);
        let zero = VolumePotential::zero(&g);
        assert!(compose_phi(&id, &zero).unwrap().displacement().max_abs() == 0.0);
        let rot = DiskMap::rotation(&g, 0.4);
        let r = compose_phi(&rot, &zero).unwrap();
        assert!((r.displacement() - rot.displacement()).max_abs() < 1e-15);
        let h = BoundaryFunction::from_fn(&g, |t| 0.015 * t.cos());
        let p = solve_volume_constraint(&g, &h, &tol()).unwrap();
        let t = compose_phi(&id, &p).unwrap();
        assert!(t.displacement().x.map(|v| v - 0.015).max_abs() < 1e-13);
        assert!(t.displacement().y.max_abs() < 1e-13);
    }
}
