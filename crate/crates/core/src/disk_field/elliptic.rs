//! Per-mode collocation solves for the Laplacian on the disk.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DVector;
use ndarray::Array2;
use num_complex::Complex64;

use super::field::{BoundaryFunction, ScalarField};
use super::grid::DiskGrid;
use crate::error::{Error, Result};
use crate::tolerances::Tolerances;

fn boundary_coeffs(grid: &DiskGrid, b: &BoundaryFunction) -> Vec<Complex64> {
    b.resized(grid.n_theta()).coefficients().to_vec()
}

fn solve_modes(
    grid: &Arc<DiskGrid>,
    rhs: &Array2<Complex64>,
    bc: &[Complex64],
    neumann: bool,
) -> ScalarField {
    let n = grid.n_r();
    let nm = grid.n_modes();
    let mut out = Array2::<Complex64>::zeros((n, nm + 1));
    for m in 0..=nm {
        let inv = if neumann {
            grid.neumann_inverse(m)
        } else {
            grid.dirichlet_inverse(m)
        };
        let size = inv.nrows();
        // real and imaginary parts share the (real) operator
        for part in 0..2 {
            let pick = |c: Complex64| if part == 0 { c.re } else { c.im };
            let mut b = DVector::zeros(size);
            for i in 0..n - 1 {
                b[i] = pick(rhs[[i, m]]);
            }
            b[n - 1] = pick(bc[m]);
            let x = inv * b;
            for i in 0..n {
                if part == 0 {
                    out[[i, m]].re = x[i];
                } else {
                    out[[i, m]].im = x[i];
                }
            }
        }
    }
    ScalarField::from_spectral(grid, &out)
}

/// Solves `lap g = rhs` in the disk with `g = bdata` on the circle.
pub fn solve_dirichlet(rhs: &ScalarField, bdata: &BoundaryFunction) -> Result<ScalarField> {
    let g = rhs.grid();
    let out = solve_modes(g, &rhs.spectral(), &boundary_coeffs(g, bdata), false);
    if out.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("dirichlet solution"));
    }
    Ok(out)
}

/// Solves `lap g = rhs`, `d_r g = flux` on the circle, with zero disk average.
///
/// Incompatible data is rejected when the mismatch between `int rhs` and
/// `int flux` exceeds `tol_compat` relative to the data size; smaller
/// mismatches are removed by shifting `rhs` by a constant.
pub fn solve_neumann_with(
    rhs: &ScalarField,
    flux: &BoundaryFunction,
    tol: &Tolerances,
) -> Result<ScalarField> {
    let g = rhs.grid();
    let bc = boundary_coeffs(g, flux);
    let int_rhs = rhs.integrate();
    let int_flux = 2.0 * PI * bc[0].re;
    let discrepancy = int_rhs - int_flux;
    let scale = 1.0_f64.max(int_rhs.abs()).max(rhs.l2_norm());
    if discrepancy.abs() > tol.tol_compat * scale {
        return Err(Error::CompatibilityViolation {
            discrepancy,
            tolerance: tol.tol_compat * scale,
        });
    }
    let mut c = rhs.spectral();
    for i in 0..g.n_r() {
        c[[i, 0]] -= discrepancy / PI;
    }
    Ok(solve_modes(g, &c, &bc, true))
}

pub fn solve_neumann(rhs: &ScalarField, flux: &BoundaryFunction) -> Result<ScalarField> {
    solve_neumann_with(rhs, flux, &Tolerances::default())
}

/// Neumann solve that first projects arbitrary data onto compatibility.
pub(crate) fn solve_neumann_projected(
    rhs: &ScalarField,
    flux: &BoundaryFunction,
) -> ScalarField {
    let g = rhs.grid();
    let bc = boundary_coeffs(g, flux);
    let discrepancy = rhs.integrate() - 2.0 * PI * bc[0].re;
    let mut c = rhs.spectral();
    for i in 0..g.n_r() {
        c[[i, 0]] -= discrepancy / PI;
    }
    solve_modes(g, &c, &bc, true)
}

/// `sum_m c_m r^|m| e^{imt}`.
pub fn harmonic_extension(grid: &Arc<DiskGrid>, bdata: &BoundaryFunction) -> ScalarField {
    let bc = boundary_coeffs(grid, bdata);
    let c = Array2::from_shape_fn((grid.n_r(), grid.n_modes() + 1), |(i, m)| {
        bc[m] * grid.radii()[i].powi(m as i32)
    });
    ScalarField::from_spectral(grid, &c)
}
