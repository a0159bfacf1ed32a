//! Eulerian vorticity-stream oracle for fixed-domain Euler flow:
//! `omega_t + u . grad omega = 0`, `u = (-psi_y, psi_x)`, `lap psi = omega`,
//! `psi = 0` on the circle. Tracer particles ride along with `u`.

use crate::disk_field::{
    gradient, rotated_gradient, solve_dirichlet, BoundaryFunction, Interpolant, ScalarField,
    VectorField,
};
use crate::error::Result;

pub fn stream_velocity(omega: &ScalarField) -> Result<VectorField> {
    let psi = solve_dirichlet(omega, &BoundaryFunction::zeros(omega.grid().n_theta()))?;
    Ok(rotated_gradient(&psi))
}

fn omega_rate(omega: &ScalarField) -> Result<(ScalarField, VectorField)> {
    let u = stream_velocity(omega)?;
    let g = gradient(omega);
    let rate = -&(&(&u.x * &g.x) + &(&u.y * &g.y));
    Ok((rate, u))
}

pub fn vorticity_oracle_step(omega: &ScalarField, dt: f64) -> Result<ScalarField> {
    Ok(VorticityState::new(omega.clone(), Vec::new()).step(dt)?.omega)
}

/// Vorticity with tracer particles, stepped together by RK4.
#[derive(Debug, Clone)]
pub struct VorticityState {
    pub omega: ScalarField,
    pub particles: Vec<[f64; 2]>,
    pub time: f64,
}

impl VorticityState {
    pub fn new(omega: ScalarField, particles: Vec<[f64; 2]>) -> Self {
        Self {
            omega,
            particles,
            time: 0.0,
        }
    }

    /// Particles start at the grid nodes.
    pub fn with_node_particles(omega: ScalarField) -> Self {
        let p = omega.grid().nodes();
        Self::new(omega, p)
    }

    fn rates(&self, omega: &ScalarField, pts: &[[f64; 2]]) -> Result<(ScalarField, Vec<[f64; 2]>)> {
        let (rate, u) = omega_rate(omega)?;
        let it = Interpolant::new(&[&u.x, &u.y]);
        let mut buf = [0.0; 2];
        let vel = pts
            .iter()
            .map(|p| {
                // particles can sit a rounding error outside the circle
                let r = p[0].hypot(p[1]);
                let q = if r > 1.0 { [p[0] / r, p[1] / r] } else { *p };
                it.eval(q, &mut buf)?;
                Ok(buf)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((rate, vel))
    }

    pub fn step(&self, dt: f64) -> Result<Self> {
        let add = |p: &[[f64; 2]], k: &[[f64; 2]], h: f64| -> Vec<[f64; 2]> {
            p.iter().zip(k).map(|(a, b)| [a[0] + h * b[0], a[1] + h * b[1]]).collect()
        };
        let (r1, p1) = self.rates(&self.omega, &self.particles)?;
        let w2 = self.omega.zip_map(&r1, |a, b| a + 0.5 * dt * b);
        let (r2, p2) = self.rates(&w2, &add(&self.particles, &p1, 0.5 * dt))?;
        let w3 = self.omega.zip_map(&r2, |a, b| a + 0.5 * dt * b);
        let (r3, p3) = self.rates(&w3, &add(&self.particles, &p2, 0.5 * dt))?;
        let w4 = self.omega.zip_map(&r3, |a, b| a + dt * b);
        let (r4, p4) = self.rates(&w4, &add(&self.particles, &p3, dt))?;
        let mut omega = self.omega.clone();
        for (r, c) in [(&r1, 1.0), (&r2, 2.0), (&r3, 2.0), (&r4, 1.0)] {
            omega = omega.zip_map(r, |a, b| a + dt / 6.0 * c * b);
        }
        let particles = self
            .particles
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let mut q = *p;
                for (k, c) in [(&p1, 1.0), (&p2, 2.0), (&p3, 2.0), (&p4, 1.0)] {
                    q[0] += dt / 6.0 * c * k[i][0];
                    q[1] += dt / 6.0 * c * k[i][1];
                }
                q
            })
            .collect();
        Ok(Self {
            omega,
            particles,
            time: self.time + dt,
        })
    }
}
