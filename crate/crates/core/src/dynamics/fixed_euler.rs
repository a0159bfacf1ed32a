//! Fixed-domain Euler flow in Lagrangian form, `zeta_dd = Z(zeta, zeta_d)`.

use std::sync::Mutex;

use crate::disk_field::{compose_vector, directional_derivative, DiskMap, MapKind, VectorField};
use crate::disk_field::interp::compose_vector_stage;
use crate::error::Result;
use crate::projections::{hodge_p, hodge_q};

#[derive(Debug, Clone)]
pub struct FixedEulerState {
    pub zeta: DiskMap,
    /// `u o zeta`.
    pub zetadot: VectorField,
    pub time: f64,
}

impl FixedEulerState {
    pub fn initial(u0: &VectorField) -> Self {
        Self {
            zeta: DiskMap::identity(u0.grid()),
            zetadot: u0.clone(),
            time: 0.0,
        }
    }
}

/// Evaluates `Z(alpha, v) = (Q(grad_u P u)) o alpha` with `u = v o alpha^-1`,
/// reusing the inverse map while `alpha` is unchanged.
#[derive(Debug, Default)]
pub struct EulerZ {
    cache: Mutex<Option<(Vec<[f64; 2]>, DiskMap)>>,
}

impl EulerZ {
    pub fn new() -> Self {
        Self::default()
    }

    fn inverse(&self, alpha: &DiskMap) -> Result<DiskMap> {
        let key = alpha.displacement().samples();
        let mut guard = self.cache.lock().expect("cache lock");
        if let Some((k, inv)) = guard.as_ref() {
            if *k == key {
                return Ok(inv.clone());
            }
        }
        let inv = alpha.inverse_unprojected()?;
        *guard = Some((key, inv.clone()));
        Ok(inv)
    }

    /// Eulerian velocity `v o alpha^-1`.
    pub fn eulerian(&self, alpha: &DiskMap, vel: &VectorField) -> Result<VectorField> {
        compose_vector_stage(vel, &self.inverse(alpha)?)
    }

    pub fn apply(&self, alpha: &DiskMap, vel: &VectorField) -> Result<VectorField> {
        let u = self.eulerian(alpha, vel)?;
        let pu = hodge_p(&u);
        let acc = hodge_q(&directional_derivative(&pu, &pu));
        compose_vector_stage(&acc, alpha)
    }
}

pub fn euler_z(alpha: &DiskMap, vel: &VectorField) -> Result<VectorField> {
    EulerZ::new().apply(alpha, vel)
}

fn shifted(s: &FixedEulerState, dz: &VectorField, dv: &VectorField, h: f64) -> FixedEulerState {
    FixedEulerState {
        zeta: DiskMap::new(s.zeta.displacement().axpy(h, dz), MapKind::Diffeomorphism),
        zetadot: s.zetadot.axpy(h, dv),
        time: s.time + h,
    }
}

/// RK4 step, then `zeta_d <- P(zeta_d o zeta^-1) o zeta`.
pub fn step_fixed_euler_with(z: &EulerZ, state: &FixedEulerState, dt: f64) -> Result<FixedEulerState> {
    let a1 = z.apply(&state.zeta, &state.zetadot)?;
    let v1 = state.zetadot.clone();
    let s2 = shifted(state, &v1, &a1, 0.5 * dt);
    let a2 = z.apply(&s2.zeta, &s2.zetadot)?;
    let v2 = s2.zetadot.clone();
    let s3 = shifted(state, &v2, &a2, 0.5 * dt);
    let a3 = z.apply(&s3.zeta, &s3.zetadot)?;
    let v3 = s3.zetadot.clone();
    let s4 = shifted(state, &v3, &a3, dt);
    let a4 = z.apply(&s4.zeta, &s4.zetadot)?;
    let v4 = s4.zetadot.clone();
    let comb = |a: &VectorField, b: &VectorField, c: &VectorField, d: &VectorField| {
        a.axpy(2.0, b).axpy(2.0, c).axpy(1.0, d).scale(dt / 6.0)
    };
    let mut zeta = DiskMap::new(
        state.zeta.displacement() + &comb(&v1, &v2, &v3, &v4),
        MapKind::Diffeomorphism,
    );
    zeta.renormalize_boundary();
    let zetadot = &state.zetadot + &comb(&a1, &a2, &a3, &a4);
    let u = hodge_p(&z.eulerian(&zeta, &zetadot)?);
    let zetadot = compose_vector(&u, &zeta)?;
    Ok(FixedEulerState {
        zeta,
        zetadot,
        time: state.time + dt,
    })
}

pub fn step_fixed_euler(state: &FixedEulerState, dt: f64) -> Result<FixedEulerState> {
    step_fixed_euler_with(&EulerZ::new(), state, dt)
}

/// `1/2 ||zeta_d||^2`.
pub fn fixed_kinetic_energy(state: &FixedEulerState) -> f64 {
    0.5 * state.zetadot.dot(&state.zetadot)
}
