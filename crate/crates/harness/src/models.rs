//! Registry of flow models the runner can integrate side by side.

use std::sync::Arc;

use captension_core::disk_field::{DiskMap, Interpolant, MapKind, ScalarField, VectorField};
use captension_core::dynamics::{
    dt_max, energy_report, fixed_kinetic_energy, lagrangian_energy, reconstruct_eta, step_fixed_euler_with,
    step_free_boundary, step_lagrangian, stream_velocity, Closure, EulerZ, FixedEulerState, FreeBoundaryState,
    LagrangianState, StepOptions, VorticityState,
};
use captension_core::disk_field::curl;
use captension_core::{Result as CoreResult, Tolerances};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy)]
pub struct ModelOptions {
    pub c_cfl: f64,
    pub tol: Tolerances,
}

/// A flow started from a divergence-free, boundary-tangent `u0`.
pub trait FlowModel: Send + Sync {
    fn name(&self) -> &'static str;
    fn start(&self, u0: &VectorField, k: f64, opts: &ModelOptions) -> Box<dyn Trajectory>;
}

pub trait Trajectory: Send {
    fn time(&self) -> f64;
    /// Largest admissible step, `INFINITY` when unconstrained.
    fn max_step(&self) -> f64;
    fn step(&mut self, dt: f64) -> CoreResult<()>;
    /// Particle map and particle velocity.
    fn particle_map(&self) -> CoreResult<(DiskMap, VectorField)>;
    /// `f` of the boundary factorization, if the model has one.
    fn shape_potential(&self) -> Option<&ScalarField>;
    fn energy(&self) -> CoreResult<f64>;
}

struct Split(Closure);

struct SplitRun {
    state: FreeBoundaryState,
    opts: StepOptions,
}

impl FlowModel for Split {
    fn name(&self) -> &'static str {
        match self.0 {
            Closure::Complete => "split",
            Closure::AsPrinted => "split-as-printed",
        }
    }

    fn start(&self, u0: &VectorField, k: f64, opts: &ModelOptions) -> Box<dyn Trajectory> {
        Box::new(SplitRun {
            state: FreeBoundaryState::initial(u0, k),
            opts: StepOptions {
                closure: self.0,
                c_cfl: opts.c_cfl,
                tol: opts.tol,
            },
        })
    }
}

impl Trajectory for SplitRun {
    fn time(&self) -> f64 {
        self.state.time
    }
    fn max_step(&self) -> f64 {
        dt_max(self.state.k, self.state.grid().n_theta(), self.opts.c_cfl)
    }
    fn step(&mut self, dt: f64) -> CoreResult<()> {
        self.state = step_free_boundary(&self.state, dt, &self.opts)?;
        Ok(())
    }
    fn particle_map(&self) -> CoreResult<(DiskMap, VectorField)> {
        reconstruct_eta(&self.state)
    }
    fn shape_potential(&self) -> Option<&ScalarField> {
        Some(&self.state.f)
    }
    fn energy(&self) -> CoreResult<f64> {
        Ok(energy_report(&self.state)?.total)
    }
}

struct Unsplit;

struct UnsplitRun {
    state: LagrangianState,
    opts: ModelOptions,
}

impl FlowModel for Unsplit {
    fn name(&self) -> &'static str {
        "unsplit-lagrangian"
    }
    fn start(&self, u0: &VectorField, k: f64, opts: &ModelOptions) -> Box<dyn Trajectory> {
        Box::new(UnsplitRun {
            state: LagrangianState::initial(u0, k),
            opts: *opts,
        })
    }
}

impl Trajectory for UnsplitRun {
    fn time(&self) -> f64 {
        self.state.time
    }
    fn max_step(&self) -> f64 {
        dt_max(self.state.k, self.state.etadot.grid().n_theta(), self.opts.c_cfl)
    }
    fn step(&mut self, dt: f64) -> CoreResult<()> {
        self.state = step_lagrangian(&self.state, dt, &self.opts.tol)?;
        Ok(())
    }
    fn particle_map(&self) -> CoreResult<(DiskMap, VectorField)> {
        Ok((self.state.eta.clone(), self.state.etadot.clone()))
    }
    fn shape_potential(&self) -> Option<&ScalarField> {
        None
    }
    fn energy(&self) -> CoreResult<f64> {
        lagrangian_energy(&self.state)
    }
}

struct FixedEuler;

struct FixedEulerRun {
    state: FixedEulerState,
    z: EulerZ,
}

impl FlowModel for FixedEuler {
    fn name(&self) -> &'static str {
        "fixed-euler"
    }
    fn start(&self, u0: &VectorField, _k: f64, _opts: &ModelOptions) -> Box<dyn Trajectory> {
        Box::new(FixedEulerRun {
            state: FixedEulerState::initial(u0),
            z: EulerZ::new(),
        })
    }
}

impl Trajectory for FixedEulerRun {
    fn time(&self) -> f64 {
        self.state.time
    }
    fn max_step(&self) -> f64 {
        f64::INFINITY
    }
    fn step(&mut self, dt: f64) -> CoreResult<()> {
        self.state = step_fixed_euler_with(&self.z, &self.state, dt)?;
        Ok(())
    }
    fn particle_map(&self) -> CoreResult<(DiskMap, VectorField)> {
        Ok((self.state.zeta.clone(), self.state.zetadot.clone()))
    }
    fn shape_potential(&self) -> Option<&ScalarField> {
        None
    }
    fn energy(&self) -> CoreResult<f64> {
        Ok(fixed_kinetic_energy(&self.state))
    }
}

struct Vorticity;

struct VorticityRun {
    state: VorticityState,
}

impl FlowModel for Vorticity {
    fn name(&self) -> &'static str {
        "vorticity-oracle"
    }
    fn start(&self, u0: &VectorField, _k: f64, _opts: &ModelOptions) -> Box<dyn Trajectory> {
        Box::new(VorticityRun {
            state: VorticityState::with_node_particles(curl(u0)),
        })
    }
}

impl Trajectory for VorticityRun {
    fn time(&self) -> f64 {
        self.state.time
    }
    fn max_step(&self) -> f64 {
        f64::INFINITY
    }
    fn step(&mut self, dt: f64) -> CoreResult<()> {
        self.state = self.state.step(dt)?;
        Ok(())
    }
    fn particle_map(&self) -> CoreResult<(DiskMap, VectorField)> {
        let g = self.state.omega.grid();
        let u = stream_velocity(&self.state.omega)?;
        let it = Interpolant::new(&[&u.x, &u.y]);
        let mut buf = [0.0; 2];
        let vel = self
            .state
            .particles
            .iter()
            .map(|p| {
                let r = p[0].hypot(p[1]).max(1.0);
                it.eval([p[0] / r, p[1] / r], &mut buf)?;
                Ok(buf)
            })
            .collect::<CoreResult<Vec<_>>>()?;
        Ok((
            DiskMap::from_points(g, &self.state.particles, MapKind::Embedding),
            VectorField::from_samples(g, &vel),
        ))
    }
    fn shape_potential(&self) -> Option<&ScalarField> {
        None
    }
    fn energy(&self) -> CoreResult<f64> {
        let u = stream_velocity(&self.state.omega)?;
        Ok(0.5 * u.dot(&u))
    }
}

/// Every registered model name.
pub const MODEL_NAMES: [&str; 5] = [
    "split",
    "split-as-printed",
    "unsplit-lagrangian",
    "fixed-euler",
    "vorticity-oracle",
];

pub fn model(name: &str) -> Result<Arc<dyn FlowModel>> {
    Ok(match name {
        "split" => Arc::new(Split(Closure::Complete)),
        "split-as-printed" => Arc::new(Split(Closure::AsPrinted)),
        "unsplit-lagrangian" => Arc::new(Unsplit),
        "fixed-euler" => Arc::new(FixedEuler),
        "vorticity-oracle" => Arc::new(Vorticity),
        _ => return Err(HarnessError::UnknownModel(name.to_string())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_roundtrips_names() {
        for n in MODEL_NAMES {
            assert_eq!(model(n).unwrap().name(), n);
        }
        assert!(matches!(model("nope"), Err(HarnessError::UnknownModel(_))));
    }
}
