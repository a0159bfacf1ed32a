//! The free-boundary system in the variables `(f, f_dot, v, beta)` with
//! `eta = (id + grad f) o beta` and `beta_dot = v o beta`.

use std::sync::Arc;

use crate::disk_field::calculus::Hessian;
use crate::disk_field::{
    compose_vector, directional_derivative, gradient, hessian, jacobian, restrict_boundary,
    second_covariant_gradient, BoundaryFunction, DiskGrid, DiskMap, MapKind, ScalarField,
    VectorField,
};
use crate::disk_field::interp::compose_vector_stage;
use crate::error::{Error, Result};
use crate::projections::{
    hodge_p, hodge_potential, solve_l1_inverse_hessian, solve_with_metric,
    PulledBackMetric,
};
use crate::shape::{boundary_geometry_of, solve_volume_unchecked};
use crate::tolerances::Tolerances;

#[derive(Debug, Clone)]
pub struct FreeBoundaryState {
    pub f: ScalarField,
    pub fdot: ScalarField,
    pub v: VectorField,
    pub beta: DiskMap,
    pub time: f64,
    /// Surface tension coefficient.
    pub k: f64,
}

impl FreeBoundaryState {
    /// Circle at `t = 0` with interior velocity `u0` (divergence-free, tangent).
    pub fn initial(u0: &VectorField, k: f64) -> Self {
        let g = u0.grid();
        Self {
            f: ScalarField::zeros(g),
            fdot: ScalarField::zeros(g),
            v: u0.clone(),
            beta: DiskMap::identity(g),
            time: 0.0,
            k,
        }
    }

    /// At rest on the shape `id + grad phi(h)`.
    pub fn from_shape(grid: &Arc<DiskGrid>, h: &BoundaryFunction, k: f64, tol: &Tolerances) -> Result<Self> {
        let pot = crate::shape::solve_volume_constraint(grid, h, tol)?;
        let mut s = Self::at_rest(grid, k);
        s.f = pot.f;
        Ok(s)
    }

    pub fn at_rest(grid: &Arc<DiskGrid>, k: f64) -> Self {
        Self::initial(&VectorField::zeros(grid), k)
    }

    pub fn grid(&self) -> &Arc<DiskGrid> {
        self.f.grid()
    }

    /// `w = grad f_dot + (id + D^2 f) v`, the Eulerian velocity pulled back by `id + grad f`.
    pub fn pulled_back_velocity(&self) -> VectorField {
        pulled_back_velocity(&gradient(&self.fdot), &hessian(&self.f), &self.v)
    }
}

fn pulled_back_velocity(grad_fdot: &VectorField, hf: &Hessian, v: &VectorField) -> VectorField {
    &(grad_fdot + v) + &hf.apply(v)
}

/// Split pressure `p = p0 + k A_H`, everything pulled back by `id + grad f`.
#[derive(Debug, Clone)]
pub struct PressureSolution {
    /// `p0 o (id + grad f)`, zero on the circle.
    pub q0: ScalarField,
    /// Harmonic extension of `curvature - 1`, pulled back.
    pub ah_hat: ScalarField,
    /// `(grad p) o (id + grad f)`.
    pub grad_p_pullback: VectorField,
}

struct Frame {
    hf: Hessian,
    grad_f: VectorField,
    metric: PulledBackMetric,
}

impl Frame {
    fn new(f: &ScalarField) -> Self {
        let grad_f = gradient(f);
        let metric = PulledBackMetric::new(&DiskMap::new(grad_f.clone(), MapKind::Embedding));
        Self {
            hf: hessian(f),
            grad_f,
            metric,
        }
    }
}

fn pressure_in_frame(
    frame: &Frame,
    w: &VectorField,
    k: f64,
    tol: &Tolerances,
) -> Result<PressureSolution> {
    let g = w.grid();
    // velocity gradient Du o eta~ = Dw (id + D^2 f)^-1
    let dw = jacobian(w);
    let [ixx, ixy, iyx, iyy] = &frame.metric.inv;
    let g11 = &(&dw.xx * ixx) + &(&dw.xy * iyx);
    let g12 = &(&dw.xx * ixy) + &(&dw.xy * iyy);
    let g21 = &(&dw.yx * ixx) + &(&dw.yy * iyx);
    let g22 = &(&dw.yx * ixy) + &(&dw.yy * iyy);
    let trace_sq = &(&(&g11 * &g11) + &(&g22 * &g22)) + &(&g12 * &g21).scale(2.0);
    let source = -&trace_sq;
    let zero = BoundaryFunction::zeros(g.n_theta());
    let q0 = solve_with_metric(&frame.metric, &source, &zero, tol)?;

    let geo = boundary_geometry_of(g, &frame.grad_f)?;
    let kappa: Vec<f64> = geo.curvature().iter().map(|c| c - 1.0).collect();
    let ah_hat = if kappa.iter().all(|c| *c == 0.0) {
        ScalarField::zeros(g)
    } else {
        let data = BoundaryFunction::from_samples(g, &kappa);
        solve_with_metric(&frame.metric, &ScalarField::zeros(g), &data, tol)?
    };
    let grad_ref = &gradient(&q0) + &gradient(&ah_hat).scale(k);
    let grad_p_pullback = frame.metric.inverse_transpose_apply(&grad_ref);
    Ok(PressureSolution {
        q0,
        ah_hat,
        grad_p_pullback,
    })
}

pub fn pressure_solve(state: &FreeBoundaryState, tol: &Tolerances) -> Result<PressureSolution> {
    let frame = Frame::new(&state.f);
    let w = pulled_back_velocity(&gradient(&state.fdot), &frame.hf, &state.v);
    pressure_in_frame(&frame, &w, state.k, tol)
}

/// How the split equations are closed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Closure {
    /// Full momentum balance: the centripetal gradient part `L Q(grad_v v)`
    /// and the pressure are carried through both the `f` and the `v` equation.
    Complete,
    /// Reduced form: no `L Q(grad_v v)` term and no pressure in
    /// the `v` equation. Rigid rotation is not stationary under it.
    AsPrinted,
}

#[derive(Debug, Clone)]
pub struct FreeBoundaryRates {
    pub fdot: ScalarField,
    pub fddot: ScalarField,
    pub vdot: VectorField,
    pub beta_velocity: VectorField,
    /// `||P A|| / ||A||` for the pre-projection right-hand side `A` of the
    /// `grad f_ddot` equation.
    pub gradient_consistency: f64,
}

pub fn rhs_free_boundary(
    state: &FreeBoundaryState,
    closure: Closure,
    tol: &Tolerances,
) -> Result<FreeBoundaryRates> {
    let frame = Frame::new(&state.f);
    let v = &state.v;
    let grad_fdot = gradient(&state.fdot);
    let w = pulled_back_velocity(&grad_fdot, &frame.hf, v);
    let pressure = pressure_in_frame(&frame, &w, state.k, tol)?;

    let hfdot = hessian(&state.fdot);
    let inertial = &hfdot.apply(v).scale(2.0) + &second_covariant_gradient(&state.f, v);
    let cov = directional_derivative(v, v);
    let p_cov = hodge_p(&cov);
    let l = |x: &VectorField| x + &frame.hf.apply(x);

    let (a, vdot, r_norm) = match closure {
        Closure::Complete => {
            let q_cov = &cov - &p_cov;
            let r = &(&inertial + &pressure.grad_p_pullback) + &l(&q_cov);
            let z = solve_l1_inverse_hessian(&frame.hf, &r, tol)?;
            let a = &r - &l(&z);
            (a, (&p_cov + &z).scale(-1.0), r.l2_norm())
        }
        Closure::AsPrinted => {
            let r = &inertial + &pressure.grad_p_pullback;
            let z = solve_l1_inverse_hessian(&frame.hf, &r, tol)?;
            let a = &r - &l(&z);
            let zv = solve_l1_inverse_hessian(&frame.hf, &inertial, tol)?;
            (a, (&p_cov + &zv).scale(-1.0), r.l2_norm())
        }
    };
    // measured against the larger of A and the bracket it came from, so a
    // round-off sized A (steady states) does not register as inconsistent
    let an = a.l2_norm().max(r_norm);
    let gradient_consistency = if an > 0.0 {
        hodge_p(&a).l2_norm() / an
    } else {
        0.0
    };
    let fddot = -&hodge_potential(&a);
    let beta_velocity = compose_vector_stage(v, &state.beta)?;
    Ok(FreeBoundaryRates {
        fdot: state.fdot.clone(),
        fddot,
        vdot,
        beta_velocity,
        gradient_consistency,
    })
}

/// Capillary step limit `c_cfl / sqrt(k (n_theta/2)^3)`.
pub fn dt_max(k: f64, n_theta: usize, c_cfl: f64) -> f64 {
    let m = (n_theta / 2) as f64;
    c_cfl / (k * m * m * m).sqrt()
}

#[derive(Debug, Clone, Copy)]
pub struct StepOptions {
    pub closure: Closure,
    pub c_cfl: f64,
    pub tol: Tolerances,
}

impl Default for StepOptions {
    fn default() -> Self {
        Self {
            closure: Closure::Complete,
            c_cfl: 0.5,
            tol: Tolerances::default(),
        }
    }
}

fn advance(s: &FreeBoundaryState, r: &FreeBoundaryRates, h: f64) -> FreeBoundaryState {
    FreeBoundaryState {
        f: s.f.zip_map(&r.fdot, |a, b| a + h * b),
        fdot: s.fdot.zip_map(&r.fddot, |a, b| a + h * b),
        v: s.v.axpy(h, &r.vdot),
        beta: DiskMap::new(
            s.beta.displacement().axpy(h, &r.beta_velocity),
            MapKind::Diffeomorphism,
        ),
        time: s.time + h,
        k: s.k,
    }
}

/// One RK4 step followed by constraint re-projection. Returns the new state
/// and the worst gradient-consistency diagnostic over the four stages.
pub fn step_free_boundary_with(
    state: &FreeBoundaryState,
    dt: f64,
    opts: &StepOptions,
) -> Result<(FreeBoundaryState, f64)> {
    let limit = dt_max(state.k, state.grid().n_theta(), opts.c_cfl);
    if dt > limit * (1.0 + 1e-12) {
        return Err(Error::CflViolation { dt, dt_max: limit });
    }
    let tol = &opts.tol;
    let k1 = rhs_free_boundary(state, opts.closure, tol)?;
    let s2 = advance(state, &k1, 0.5 * dt);
    let k2 = rhs_free_boundary(&s2, opts.closure, tol)?;
    let s3 = advance(state, &k2, 0.5 * dt);
    let k3 = rhs_free_boundary(&s3, opts.closure, tol)?;
    let s4 = advance(state, &k3, dt);
    let k4 = rhs_free_boundary(&s4, opts.closure, tol)?;
    let consistency = [&k1, &k2, &k3, &k4]
        .iter()
        .map(|k| k.gradient_consistency)
        .fold(0.0, f64::max);

    let comb = |a: &ScalarField, b: &ScalarField, c: &ScalarField, d: &ScalarField| {
        let mut out = a.clone();
        out = out.zip_map(b, |x, y| x + 2.0 * y);
        out = out.zip_map(c, |x, y| x + 2.0 * y);
        out.zip_map(d, |x, y| x + y).scale(dt / 6.0)
    };
    let combv = |a: &VectorField, b: &VectorField, c: &VectorField, d: &VectorField| VectorField {
        x: comb(&a.x, &b.x, &c.x, &d.x),
        y: comb(&a.y, &b.y, &c.y, &d.y),
    };
    let f = &state.f + &comb(&k1.fdot, &k2.fdot, &k3.fdot, &k4.fdot);
    let fdot = &state.fdot + &comb(&k1.fddot, &k2.fddot, &k3.fddot, &k4.fddot);
    let v = &state.v + &combv(&k1.vdot, &k2.vdot, &k3.vdot, &k4.vdot);
    let bd = state.beta.displacement()
        + &combv(&k1.beta_velocity, &k2.beta_velocity, &k3.beta_velocity, &k4.beta_velocity);

    // re-projection onto the constraint set
    let pot = solve_volume_unchecked(state.grid(), &restrict_boundary(&f), tol)
        .map_err(|e| Error::ProjectionFailure(Box::new(e)))?;
    let mut beta = DiskMap::new(bd, MapKind::Diffeomorphism);
    beta.renormalize_boundary();
    let next = FreeBoundaryState {
        f: pot.f,
        fdot,
        v: hodge_p(&v),
        beta,
        time: state.time + dt,
        k: state.k,
    };
    for field in [&next.f, &next.fdot, &next.v.x, &next.v.y] {
        if field.values().iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("free-boundary state"));
        }
    }
    Ok((next, consistency))
}

pub fn step_free_boundary(state: &FreeBoundaryState, dt: f64, opts: &StepOptions) -> Result<FreeBoundaryState> {
    step_free_boundary_with(state, dt, opts).map(|(s, _)| s)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    pub kinetic: f64,
    pub potential: f64,
    /// `kinetic + potential`, conserved.
    pub total: f64,
    pub e_tilde: f64,
}

/// Kinetic energy `1/2 ||eta_dot||^2` (equal to `1/2 ||w||^2` since `beta`
/// preserves area), capillary energy `k (length - 2 pi)`, and
/// `E~ = 1/2 ||grad f_dot||^2 + k length`.
pub fn energy_report(state: &FreeBoundaryState) -> Result<EnergyReport> {
    let grad_f = gradient(&state.f);
    let geo = boundary_geometry_of(state.grid(), &grad_f)?;
    let length = geo.length();
    let w = state.pulled_back_velocity();
    let kinetic = 0.5 * w.dot(&w);
    let potential = state.k * (length - 2.0 * std::f64::consts::PI);
    let gfd = gradient(&state.fdot);
    Ok(EnergyReport {
        kinetic,
        potential,
        total: kinetic + potential,
        e_tilde: 0.5 * gfd.dot(&gfd) + state.k * length,
    })
}

/// `eta = (id + grad f) o beta` and `eta_dot = w o beta`.
pub fn reconstruct_eta(state: &FreeBoundaryState) -> Result<(DiskMap, VectorField)> {
    let grad_f = gradient(&state.f);
    let moved = compose_vector(&grad_f, &state.beta)?;
    let eta = DiskMap::new(state.beta.displacement() + &moved, MapKind::Embedding);
    let etadot = compose_vector(&state.pulled_back_velocity(), &state.beta)?;
    Ok((eta, etadot))
}
