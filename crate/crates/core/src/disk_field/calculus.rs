//! Spectral derivatives on the disk.
//!
//! Derivatives are taken per Fourier mode in polar form and rotated to
//! Cartesian components pointwise, so `f_xx + f_yy` equals the modal
//! Laplacian node by node.

use std::sync::Arc;

use ndarray::{Array2, Zip};
use num_complex::Complex64;

use super::field::{ScalarField, VectorField};
use super::grid::DiskGrid;

fn radial_apply(grid: &DiskGrid, c: &Array2<Complex64>, second: bool) -> Array2<Complex64> {
    let (n_r, nm1) = c.dim();
    let mut out = Array2::zeros((n_r, nm1));
    for m in 0..nm1 {
        let d = if second { grid.d2(m) } else { grid.d1(m) };
        for i in 0..n_r {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..n_r {
                acc += d[[i, k]] * c[[k, m]];
            }
            out[[i, m]] = acc;
        }
    }
    out
}

fn angular_apply(c: &Array2<Complex64>, order: u32) -> Array2<Complex64> {
    let nm = c.ncols() - 1;
    let mut out = c.clone();
    for ((_, m), v) in out.indexed_iter_mut() {
        let mm = m as f64;
        *v = match order {
            1 if m == nm => Complex64::new(0.0, 0.0),
            1 => *v * Complex64::new(0.0, mm),
            2 => *v * (-mm * mm),
            _ => unreachable!(),
        };
    }
    out
}

/// Polar partial derivatives of a field, sampled at the nodes.
pub(crate) struct PolarDerivatives {
    pub f_r: Array2<f64>,
    pub f_t: Array2<f64>,
    pub second: Option<[Array2<f64>; 3]>,
}

pub(crate) fn polar_derivatives(f: &ScalarField, with_second: bool) -> PolarDerivatives {
    let g = f.grid();
    let c = f.spectral();
    let cr = radial_apply(g, &c, false);
    let ct = angular_apply(&c, 1);
    let second = with_second.then(|| {
        let crr = radial_apply(g, &c, true);
        let crt = radial_apply(g, &ct, false);
        let ctt = angular_apply(&c, 2);
        [g.inverse(&crr), g.inverse(&crt), g.inverse(&ctt)]
    });
    PolarDerivatives {
        f_r: g.inverse(&cr),
        f_t: g.inverse(&ct),
        second,
    }
}

fn node_map(
    grid: &Arc<DiskGrid>,
    f: impl Fn(usize, usize, f64, f64, f64) -> f64,
) -> ScalarField {
    let values = Array2::from_shape_fn((grid.n_r(), grid.n_theta()), |(i, j)| {
        f(i, j, grid.radii()[i], grid.cos_theta()[j], grid.sin_theta()[j])
    });
    ScalarField::from_values_unchecked(grid.clone(), values)
}

/// Cartesian gradient `(f_x, f_y)`.
pub fn gradient(f: &ScalarField) -> VectorField {
    let g = f.grid();
    let d = polar_derivatives(f, false);
    let x = node_map(g, |i, j, r, c, s| c * d.f_r[[i, j]] - s * d.f_t[[i, j]] / r);
    let y = node_map(g, |i, j, r, c, s| s * d.f_r[[i, j]] + c * d.f_t[[i, j]] / r);
    VectorField { x, y }
}

/// Symmetric Hessian `(f_xx, f_xy, f_yy)`.
#[derive(Debug, Clone)]
pub struct Hessian {
    pub xx: ScalarField,
    pub xy: ScalarField,
    pub yy: ScalarField,
}

impl Hessian {
    /// `H w` node-wise.
    pub fn apply(&self, w: &VectorField) -> VectorField {
        let x = ScalarField::from_values_unchecked(
            w.grid().clone(),
            &(self.xx.values() * w.x.values()) + &(self.xy.values() * w.y.values()),
        );
        let y = ScalarField::from_values_unchecked(
            w.grid().clone(),
            &(self.xy.values() * w.x.values()) + &(self.yy.values() * w.y.values()),
        );
        VectorField { x, y }
    }

    pub fn determinant(&self) -> ScalarField {
        let mut v = self.xx.values() * self.yy.values();
        Zip::from(&mut v)
            .and(self.xy.values())
            .for_each(|a, &b| *a -= b * b);
        ScalarField::from_values_unchecked(self.xx.grid().clone(), v)
    }

    pub fn trace(&self) -> ScalarField {
        &self.xx + &self.yy
    }
}

pub fn hessian(f: &ScalarField) -> Hessian {
    let g = f.grid();
    let d = polar_derivatives(f, true);
    let [frr, frt, ftt] = d.second.expect("second derivatives requested");
    // a = f_r/r + f_tt/r^2, b = f_rt/r - f_t/r^2
    let a = |i: usize, j: usize, r: f64| d.f_r[[i, j]] / r + ftt[[i, j]] / (r * r);
    let b = |i: usize, j: usize, r: f64| frt[[i, j]] / r - d.f_t[[i, j]] / (r * r);
    let xx = node_map(g, |i, j, r, c, s| {
        c * c * frr[[i, j]] + s * s * a(i, j, r) - 2.0 * s * c * b(i, j, r)
    });
    let yy = node_map(g, |i, j, r, c, s| {
        s * s * frr[[i, j]] + c * c * a(i, j, r) + 2.0 * s * c * b(i, j, r)
    });
    let xy = node_map(g, |i, j, r, c, s| {
        s * c * (frr[[i, j]] - a(i, j, r)) + (c * c - s * s) * b(i, j, r)
    });
    Hessian { xx, xy, yy }
}

/// Modal Laplacian `f_rr + f_r / r + f_tt / r^2`.
pub fn laplacian(f: &ScalarField) -> ScalarField {
    let g = f.grid();
    let c = f.spectral();
    let cr = radial_apply(g, &c, false);
    let crr = radial_apply(g, &c, true);
    let mut out = crr;
    for ((i, m), v) in out.indexed_iter_mut() {
        let r = g.radii()[i];
        let mm = (m * m) as f64;
        *v += cr[[i, m]] / r - c[[i, m]] * (mm / (r * r));
    }
    ScalarField::from_spectral(g, &out)
}

pub fn divergence(w: &VectorField) -> ScalarField {
    let gx = gradient(&w.x);
    let gy = gradient(&w.y);
    &gx.x + &gy.y
}

/// Scalar curl `d_x w_y - d_y w_x`.
pub fn curl(w: &VectorField) -> ScalarField {
    let gx = gradient(&w.x);
    let gy = gradient(&w.y);
    &gy.x - &gx.y
}

/// Rotated gradient `(-psi_y, psi_x)`; divergence-free, and tangent to the
/// boundary when `psi` vanishes there.
pub fn rotated_gradient(psi: &ScalarField) -> VectorField {
    let g = gradient(psi);
    VectorField {
        x: g.y.scale(-1.0),
        y: g.x,
    }
}

/// Cartesian derivative matrix of a vector field, `[[dx wx, dy wx], [dx wy, dy wy]]`.
#[derive(Debug, Clone)]
pub struct Jacobian {
    pub xx: ScalarField,
    pub xy: ScalarField,
    pub yx: ScalarField,
    pub yy: ScalarField,
}

impl Jacobian {
    /// `(Dw) v`
    pub fn apply(&self, v: &VectorField) -> VectorField {
        VectorField {
            x: &(&self.xx * &v.x) + &(&self.xy * &v.y),
            y: &(&self.yx * &v.x) + &(&self.yy * &v.y),
        }
    }

    pub fn determinant(&self) -> ScalarField {
        &(&self.xx * &self.yy) - &(&self.xy * &self.yx)
    }
}

pub fn jacobian(w: &VectorField) -> Jacobian {
    let gx = gradient(&w.x);
    let gy = gradient(&w.y);
    Jacobian {
        xx: gx.x,
        xy: gx.y,
        yx: gy.x,
        yy: gy.y,
    }
}

/// Covariant derivative `(D w) v = v . grad w`.
pub fn directional_derivative(w: &VectorField, v: &VectorField) -> VectorField {
    jacobian(w).apply(v)
}

/// Third derivatives `(f_xxx, f_xxy, f_xyy, f_yyy)`.
pub fn third_derivatives(f: &ScalarField) -> [ScalarField; 4] {
    let h = hessian(f);
    let gxx = gradient(&h.xx);
    let gyy = gradient(&h.yy);
    [gxx.x, gxx.y, gyy.x, gyy.y]
}

/// `(D^2_vv grad f)^i = v^j v^l d_jl d_i f`.
pub fn second_covariant_gradient(f: &ScalarField, v: &VectorField) -> VectorField {
    let [txxx, txxy, txyy, tyyy] = third_derivatives(f);
    let vx = v.x.values();
    let vy = v.y.values();
    let g = f.grid();
    let mut ox = Array2::zeros(vx.dim());
    let mut oy = Array2::zeros(vx.dim());
    Zip::indexed(&mut ox).and(&mut oy).for_each(|ij, ox, oy| {
        let (a, b) = (vx[ij], vy[ij]);
        *ox = a * a * txxx.values()[ij] + 2.0 * a * b * txxy.values()[ij] + b * b * txyy.values()[ij];
        *oy = a * a * txxy.values()[ij] + 2.0 * a * b * txyy.values()[ij] + b * b * tyyy.values()[ij];
    });
    VectorField {
        x: ScalarField::from_values_unchecked(g.clone(), ox),
        y: ScalarField::from_values_unchecked(g.clone(), oy),
    }
}

/// Fourier derivative along the outer ring, `d/dtheta` of boundary samples.
pub fn ring_derivative(grid: &DiskGrid, samples: &[f64], order: u32) -> Vec<f64> {
    let nm = grid.n_modes();
    let mut c = grid.forward_ring(samples);
    for (m, v) in c.iter_mut().enumerate() {
        let mm = m as f64;
        let factor = Complex64::new(0.0, mm).powu(order);
        *v = if m == nm && order % 2 == 1 {
            Complex64::new(0.0, 0.0)
        } else {
            *v * factor
        };
    }
    grid.inverse_ring(&c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Arc<DiskGrid> {
        DiskGrid::new(16, 12).unwrap()
    }

    #[test]
    fn gradient_of_r_squared() {
        let g = grid();
        let f = ScalarField::from_fn(&g, |x, y| x * x + y * y);
        let gr = gradient(&f);
        let exact = VectorField::from_fn(&g, |x, y| [2.0 * x, 2.0 * y]);
        assert!((&gr - &exact).max_abs() < 1e-10);
    }

    #[test]
    fn gradient_of_constant_vanishes() {
        let g = grid();
        assert!(gradient(&ScalarField::constant(&g, 3.7)).max_abs() < 1e-12);
    }

    #[test]
    fn gradient_of_cubic_harmonic_matches_symbolic() {
        // r^3 cos 3t = x^3 - 3 x y^2
        let g = grid();
        let f = ScalarField::from_polar(&g, |r, t| r.powi(3) * (3.0 * t).cos());
        let exact = VectorField::from_fn(&g, |x, y| [3.0 * x * x - 3.0 * y * y, -6.0 * x * y]);
        assert!((&gradient(&f) - &exact).max_abs() < 1e-8);
    }

    #[test]
    fn divergence_examples() {
        let g = grid();
        let radial = VectorField::from_fn(&g, |x, y| [x, y]);
        assert!(divergence(&radial).map(|v| v - 2.0).max_abs() < 1e-10);
        let rot = VectorField::from_fn(&g, |x, y| [-y, x]);
        assert!(divergence(&rot).max_abs() < 1e-10);
    }

    #[test]
    fn laplacian_examples() {
        let g = grid();
        let h = ScalarField::from_polar(&g, |r, t| r.powi(3) * (3.0 * t).cos());
        assert!(laplacian(&h).max_abs() < 1e-9);
        let r2 = ScalarField::from_fn(&g, |x, y| x * x + y * y);
        assert!(laplacian(&r2).map(|v| v - 4.0).max_abs() < 1e-10);
        // (1 - r^2)^2 = 1 - 2 r^2 + r^4, Laplacian = -8 + 16 r^2
        let bump = ScalarField::from_polar(&g, |r, _| (1.0 - r * r).powi(2));
        let exact = ScalarField::from_polar(&g, |r, _| 16.0 * r * r - 8.0);
        assert!((&laplacian(&bump) - &exact).max_abs() < 1e-9);
    }

    #[test]
    fn hessian_trace_is_modal_laplacian() {
        let g = DiskGrid::new(32, 16).unwrap();
        let f = ScalarField::from_fn(&g, |x, y| (x * 1.3).sin() * (0.7 * y).exp() + x * y * y);
        let h = hessian(&f);
        assert!((&h.trace() - &laplacian(&f)).max_abs() < 1e-12);
        let exact_xy = ScalarField::from_fn(&g, |x, y| 1.3 * (x * 1.3).cos() * 0.7 * (0.7 * y).exp() + 2.0 * y);
        assert!((&h.xy - &exact_xy).max_abs() < 1e-8);
        let exact_xx = ScalarField::from_fn(&g, |x, y| -1.69 * (x * 1.3).sin() * (0.7 * y).exp());
        assert!((&h.xx - &exact_xx).max_abs() < 1e-8);
    }

    #[test]
    fn third_derivatives_of_cubic() {
        let g = grid();
        let f = ScalarField::from_fn(&g, |x, y| x * x * x + 2.0 * x * x * y - y * y * y);
        let [a, b, c, d] = third_derivatives(&f);
        assert!(a.map(|v| v - 6.0).max_abs() < 1e-8);
        assert!(b.map(|v| v - 4.0).max_abs() < 1e-8);
        assert!(c.max_abs() < 1e-8);
        assert!(d.map(|v| v + 6.0).max_abs() < 1e-8);
    }

    #[test]
    fn ring_derivative_of_trig() {
        let g = grid();
        let s: Vec<f64> = g.theta().iter().map(|t| (3.0 * t).sin()).collect();
        let d = ring_derivative(&g, &s, 1);
        let d2 = ring_derivative(&g, &s, 2);
        for (j, t) in g.theta().iter().enumerate() {
            assert!((d[j] - 3.0 * (3.0 * t).cos()).abs() < 1e-12);
            assert!((d2[j] + 9.0 * (3.0 * t).sin()).abs() < 1e-11);
        }
    }
}
