//! Direct Lagrangian integration of `eta_dd = -(grad p) o eta` without the
//! factorization, used to arbitrate between closures of the split system.

use crate::disk_field::{jacobian, BoundaryFunction, DiskMap, MapKind, ScalarField, VectorField};
use crate::error::{Error, Result};
use crate::projections::{solve_with_metric, PulledBackMetric};
use crate::shape::curve_geometry;
use crate::tolerances::Tolerances;

#[derive(Debug, Clone)]
pub struct LagrangianState {
    pub eta: DiskMap,
    pub etadot: VectorField,
    pub time: f64,
    pub k: f64,
}

impl LagrangianState {
    pub fn initial(u0: &VectorField, k: f64) -> Self {
        Self {
            eta: DiskMap::identity(u0.grid()).with_kind(MapKind::Embedding),
            etadot: u0.clone(),
            time: 0.0,
            k,
        }
    }
}

/// Pressure `q = p o eta`: `Delta_eta q = -tr((D eta_d D eta^-1)^2)`,
/// `q = k (curvature - 1)` on the circle.
pub fn lagrangian_pressure(state: &LagrangianState, tol: &Tolerances) -> Result<ScalarField> {
    let metric = PulledBackMetric::new(&state.eta);
    pressure_with(&metric, state, tol)
}

fn pressure_with(metric: &PulledBackMetric, state: &LagrangianState, tol: &Tolerances) -> Result<ScalarField> {
    let g = state.etadot.grid();
    let d = jacobian(&state.etadot);
    let [ixx, ixy, iyx, iyy] = &metric.inv;
    let g11 = &(&d.xx * ixx) + &(&d.xy * iyx);
    let g12 = &(&d.xx * ixy) + &(&d.xy * iyy);
    let g21 = &(&d.yx * ixx) + &(&d.yy * iyx);
    let g22 = &(&d.yx * ixy) + &(&d.yy * iyy);
    let source = -&(&(&(&g11 * &g11) + &(&g22 * &g22)) + &(&g12 * &g21).scale(2.0));
    let pts = state.eta.points();
    let ring = &pts[(g.n_r() - 1) * g.n_theta()..];
    let xs: Vec<f64> = ring.iter().map(|p| p[0]).collect();
    let ys: Vec<f64> = ring.iter().map(|p| p[1]).collect();
    let geo = curve_geometry(g, &xs, &ys)?;
    let data: Vec<f64> = geo.curvature().iter().map(|c| state.k * (c - 1.0)).collect();
    solve_with_metric(metric, &source, &BoundaryFunction::from_samples(g, &data), tol)
}

pub fn lagrangian_acceleration(state: &LagrangianState, tol: &Tolerances) -> Result<VectorField> {
    let metric = PulledBackMetric::new(&state.eta);
    let q = pressure_with(&metric, state, tol)?;
    Ok(metric
        .inverse_transpose_apply(&crate::disk_field::gradient(&q))
        .scale(-1.0))
}

pub fn step_lagrangian(state: &LagrangianState, dt: f64, tol: &Tolerances) -> Result<LagrangianState> {
    let shift = |s: &LagrangianState, dx: &VectorField, dv: &VectorField, h: f64| LagrangianState {
        eta: DiskMap::new(s.eta.displacement().axpy(h, dx), MapKind::Embedding),
        etadot: s.etadot.axpy(h, dv),
        time: s.time + h,
        k: s.k,
    };
    let a1 = lagrangian_acceleration(state, tol)?;
    let v1 = state.etadot.clone();
    let s2 = shift(state, &v1, &a1, 0.5 * dt);
    let a2 = lagrangian_acceleration(&s2, tol)?;
    let s3 = shift(state, &s2.etadot, &a2, 0.5 * dt);
    let a3 = lagrangian_acceleration(&s3, tol)?;
    let s4 = shift(state, &s3.etadot, &a3, dt);
    let a4 = lagrangian_acceleration(&s4, tol)?;
    let comb = |a: &VectorField, b: &VectorField, c: &VectorField, d: &VectorField| {
        a.axpy(2.0, b).axpy(2.0, c).axpy(1.0, d).scale(dt / 6.0)
    };
    let next = LagrangianState {
        eta: DiskMap::new(
            state.eta.displacement() + &comb(&v1, &s2.etadot, &s3.etadot, &s4.etadot),
            MapKind::Embedding,
        ),
        etadot: &state.etadot + &comb(&a1, &a2, &a3, &a4),
        time: state.time + dt,
        k: state.k,
    };
    if next.etadot.max_abs().is_nan() {
        return Err(Error::NonFinite("Lagrangian state"));
    }
    Ok(next)
}

/// `1/2 ||eta_d||^2 + k (length - 2 pi)`.
pub fn lagrangian_energy(state: &LagrangianState) -> Result<f64> {
    let g = state.etadot.grid();
    let pts = state.eta.points();
    let ring = &pts[(g.n_r() - 1) * g.n_theta()..];
    let xs: Vec<f64> = ring.iter().map(|p| p[0]).collect();
    let ys: Vec<f64> = ring.iter().map(|p| p[1]).collect();
    let geo = curve_geometry(g, &xs, &ys)?;
    Ok(0.5 * state.etadot.dot(&state.etadot) + state.k * (geo.length() - 2.0 * std::f64::consts::PI))
}
