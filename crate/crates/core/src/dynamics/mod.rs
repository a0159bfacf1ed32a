//! Time evolution: the split free-boundary system, fixed-domain Euler in
//! Lagrangian form, and two independent oracles.

pub mod fixed_euler;
pub mod free_boundary;
pub mod unsplit;
pub mod vorticity;

use std::sync::Arc;

use crate::disk_field::{rotated_gradient, DiskGrid, ScalarField, VectorField};

pub use fixed_euler::{
    euler_z, fixed_kinetic_energy, step_fixed_euler, step_fixed_euler_with, EulerZ, FixedEulerState,
};
pub use free_boundary::{
    dt_max, energy_report, pressure_solve, reconstruct_eta, rhs_free_boundary, step_free_boundary,
    step_free_boundary_with, Closure, EnergyReport, FreeBoundaryRates, FreeBoundaryState,
    PressureSolution, StepOptions,
};
pub use unsplit::{lagrangian_energy, lagrangian_pressure, step_lagrangian, LagrangianState};
pub use vorticity::{stream_velocity, vorticity_oracle_step, VorticityState};

/// `psi0 = amplitude (1 - r^2)^2 r^m cos(m theta)`; vanishes with its
/// gradient on the circle.
pub fn stream_function(grid: &Arc<DiskGrid>, amplitude: f64, m: u32) -> ScalarField {
    ScalarField::from_polar(grid, |r, t| {
        let s = 1.0 - r * r;
        amplitude * s * s * r.powi(m as i32) * (m as f64 * t).cos()
    })
}

/// Divergence-free, boundary-tangent velocity `(-psi_y, psi_x)`.
pub fn stream_velocity_field(grid: &Arc<DiskGrid>, amplitude: f64, m: u32) -> VectorField {
    rotated_gradient(&stream_function(grid, amplitude, m))
}

/// Solid rotation `(-y, x)` with unit angular velocity.
pub fn solid_rotation(grid: &Arc<DiskGrid>) -> VectorField {
    VectorField::from_fn(grid, |x, y| [-y, x])
}
