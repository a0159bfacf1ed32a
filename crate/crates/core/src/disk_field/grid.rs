//! Fourier x Chebyshev collocation grid on the closed unit disk.
//!
//! The radial direction uses the Chebyshev-Lobatto points of the doubled
//! interval `[-1, 1]` with an even number of nodes, so `r = 0` is never a
//! node. A smooth function on the disk satisfies `f(-r, t) = f(r, t + pi)`,
//! hence its angular mode `m` has radial parity `(-1)^m`; every radial
//! operator is folded onto the positive half with that parity.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use ndarray::{Array1, Array2};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;

pub struct DiskGrid {
    n_theta: usize,
    n_r: usize,
    radii: Vec<f64>,
    theta: Vec<f64>,
    cos_t: Vec<f64>,
    sin_t: Vec<f64>,
    /// Full doubled Chebyshev grid, descending from 1 to -1.
    cheb: Vec<f64>,
    bary: Vec<f64>,
    /// First and second radial derivative, indexed by parity (0 even, 1 odd).
    d1: [Array2<f64>; 2],
    d2: [Array2<f64>; 2],
    radial_weights: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    dirichlet_inv: Vec<DMatrix<f64>>,
    neumann_inv: Vec<DMatrix<f64>>,
}

impl std::fmt::Debug for DiskGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DiskGrid")
            .field("n_theta", &self.n_theta)
            .field("n_r", &self.n_r)
            .finish()
    }
}

impl DiskGrid {
    pub fn new(n_theta: usize, n_r: usize) -> Result<Arc<Self>> {
        if n_theta < 8 || n_theta % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "n_theta must be even and >= 8, got {n_theta}"
            )));
        }
        if n_r < 8 {
            return Err(Error::InvalidGrid(format!("n_r must be >= 8, got {n_r}")));
        }
        let n_full = 2 * n_r;
        let deg = n_full - 1;
        let cheb: Vec<f64> = (0..n_full)
            .map(|j| (PI * j as f64 / deg as f64).cos())
            .collect();
        let bary: Vec<f64> = (0..n_full)
            .map(|j| {
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                if j == 0 || j == deg {
                    0.5 * s
                } else {
                    s
                }
            })
            .collect();
        let dfull = cheb_diff(&cheb);
        let d2full = dfull.dot(&dfull);

        // positive node i (increasing radius) <-> full index n_r - 1 - i
        let full_index = |i: usize| n_r - 1 - i;
        let radii: Vec<f64> = (0..n_r).map(|i| cheb[full_index(i)]).collect();

        let fold = |m: &Array2<f64>, parity: f64| {
            Array2::from_shape_fn((n_r, n_r), |(i, k)| {
                let (ji, jk) = (full_index(i), full_index(k));
                m[[ji, jk]] + parity * m[[ji, deg - jk]]
            })
        };
        let d1 = [fold(&dfull, 1.0), fold(&dfull, -1.0)];
        let d2 = [fold(&d2full, 1.0), fold(&d2full, -1.0)];

        // weights for int_0^1 g(r) r dr, exact for even interpolants
        let (gx, gw) = gauss_legendre(2 * n_r + 2, 0.0, 1.0);
        let mut radial_weights = vec![0.0; n_r];
        for (x, w) in gx.iter().zip(&gw) {
            let l = lagrange_basis(&cheb, &bary, *x);
            for (i, rw) in radial_weights.iter_mut().enumerate() {
                let j = full_index(i);
                *rw += w * x * (l[j] + l[deg - j]);
            }
        }

        let theta: Vec<f64> = (0..n_theta)
            .map(|j| 2.0 * PI * j as f64 / n_theta as f64)
            .collect();
        let cos_t = theta.iter().map(|t| t.cos()).collect();
        let sin_t = theta.iter().map(|t| t.sin()).collect();

        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(n_theta);
        let ifft = planner.plan_fft_inverse(n_theta);

        let mut grid = DiskGrid {
            n_theta,
            n_r,
            radii,
            theta,
            cos_t,
            sin_t,
            cheb,
            bary,
            d1,
            d2,
            radial_weights,
            fft,
            ifft,
            dirichlet_inv: Vec::new(),
            neumann_inv: Vec::new(),
        };
        grid.factorize()?;
        Ok(Arc::new(grid))
    }

    fn factorize(&mut self) -> Result<()> {
        let n = self.n_r;
        let last = n - 1;
        for m in 0..=self.n_modes() {
            let lap = self.laplacian_matrix(m);
            let mut dir = lap.clone();
            for k in 0..n {
                dir[(last, k)] = if k == last { 1.0 } else { 0.0 };
            }
            let dinv = dir
                .try_inverse()
                .ok_or(Error::SolverFailure { mode: m })?;
            self.dirichlet_inv.push(dinv);

            let p = m % 2;
            let mut neu = lap;
            for k in 0..n {
                neu[(last, k)] = self.d1[p][[last, k]];
            }
            let ninv = if m == 0 {
                // Bordered system: interior rows absorb a constant shift,
                // the extra row pins the disk average to zero.
                let mut b = DMatrix::zeros(n + 1, n + 1);
                b.view_mut((0, 0), (n, n)).copy_from(&neu);
                for i in 0..last {
                    b[(i, n)] = 1.0;
                }
                for k in 0..n {
                    b[(n, k)] = self.radial_weights[k];
                }
                b.try_inverse().ok_or(Error::SolverFailure { mode: 0 })?
            } else {
                neu.try_inverse().ok_or(Error::SolverFailure { mode: m })?
            };
            self.neumann_inv.push(ninv);
        }
        Ok(())
    }

    /// Collocation matrix of `d_rr + d_r / r - m^2 / r^2` on mode `m`.
    pub fn laplacian_matrix(&self, m: usize) -> DMatrix<f64> {
        let p = m % 2;
        let n = self.n_r;
        let m2 = (m * m) as f64;
        DMatrix::from_fn(n, n, |i, k| {
            let r = self.radii[i];
            let mut v = self.d2[p][[i, k]] + self.d1[p][[i, k]] / r;
            if i == k {
                v -= m2 / (r * r);
            }
            v
        })
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    /// Highest angular wavenumber, `n_theta / 2`.
    pub fn n_modes(&self) -> usize {
        self.n_theta / 2
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn cos_theta(&self) -> &[f64] {
        &self.cos_t
    }

    pub fn sin_theta(&self) -> &[f64] {
        &self.sin_t
    }

    pub fn len(&self) -> usize {
        self.n_r * self.n_theta
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn same_shape(&self, other: &DiskGrid) -> bool {
        self.n_r == other.n_r && self.n_theta == other.n_theta
    }

    /// Cartesian coordinates of node `(i, j)`.
    pub fn node(&self, i: usize, j: usize) -> [f64; 2] {
        let r = self.radii[i];
        [r * self.cos_t[j], r * self.sin_t[j]]
    }

    /// All nodes in ring-major order.
    pub fn nodes(&self) -> Vec<[f64; 2]> {
        let mut out = Vec::with_capacity(self.len());
        for i in 0..self.n_r {
            for j in 0..self.n_theta {
                out.push(self.node(i, j));
            }
        }
        out
    }

    /// Weights `w_i` with `int_0^1 g(r) r dr = sum_i w_i g(r_i)`.
    pub fn radial_weights(&self) -> &[f64] {
        &self.radial_weights
    }

    /// Folded radial derivative matrices for the given angular mode.
    pub fn d1(&self, m: usize) -> &Array2<f64> {
        &self.d1[m % 2]
    }

    pub fn d2(&self, m: usize) -> &Array2<f64> {
        &self.d2[m % 2]
    }

    pub(crate) fn dirichlet_inverse(&self, m: usize) -> &DMatrix<f64> {
        &self.dirichlet_inv[m]
    }

    pub(crate) fn neumann_inverse(&self, m: usize) -> &DMatrix<f64> {
        &self.neumann_inv[m]
    }

    /// Per-ring Fourier coefficients `c_m`, `0 <= m <= n_theta/2`, with
    /// `f(t) = c_0 + 2 sum_{m>=1} Re(c_m e^{imt})`. The Nyquist coefficient
    /// is stored halved so the same synthesis formula applies to it.
    pub fn forward(&self, values: &Array2<f64>) -> Array2<Complex64> {
        let nm = self.n_modes();
        let inv_n = 1.0 / self.n_theta as f64;
        let mut out = Array2::zeros((self.n_r, nm + 1));
        let mut buf = vec![Complex64::new(0.0, 0.0); self.n_theta];
        for i in 0..self.n_r {
            for (b, v) in buf.iter_mut().zip(values.row(i)) {
                *b = Complex64::new(*v, 0.0);
            }
            self.fft.process(&mut buf);
            for m in 0..=nm {
                out[[i, m]] = buf[m] * inv_n;
            }
            out[[i, nm]] = Complex64::new(0.5 * out[[i, nm]].re, 0.0);
        }
        out
    }

    pub fn inverse(&self, coeffs: &Array2<Complex64>) -> Array2<f64> {
        let nm = self.n_modes();
        let n = self.n_theta;
        let mut out = Array2::zeros((self.n_r, n));
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..self.n_r {
            buf.iter_mut().for_each(|b| *b = Complex64::new(0.0, 0.0));
            buf[0] = Complex64::new(coeffs[[i, 0]].re, 0.0);
            for m in 1..nm {
                buf[m] = coeffs[[i, m]];
                buf[n - m] = coeffs[[i, m]].conj();
            }
            buf[nm] = Complex64::new(2.0 * coeffs[[i, nm]].re, 0.0);
            self.ifft.process(&mut buf);
            for (o, b) in out.row_mut(i).iter_mut().zip(&buf) {
                *o = b.re;
            }
        }
        out
    }

    /// One-dimensional transform of a single ring of samples.
    pub fn forward_ring(&self, values: &[f64]) -> Vec<Complex64> {
        assert_eq!(values.len(), self.n_theta);
        let nm = self.n_modes();
        let mut buf: Vec<Complex64> = values.iter().map(|v| Complex64::new(*v, 0.0)).collect();
        self.fft.process(&mut buf);
        let inv_n = 1.0 / self.n_theta as f64;
        let mut out: Vec<Complex64> = buf[..=nm].iter().map(|c| c * inv_n).collect();
        out[nm] = Complex64::new(0.5 * out[nm].re, 0.0);
        out
    }

    pub fn inverse_ring(&self, coeffs: &[Complex64]) -> Vec<f64> {
        let nm = self.n_modes();
        let n = self.n_theta;
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        buf[0] = Complex64::new(coeffs[0].re, 0.0);
        for m in 1..nm {
            buf[m] = coeffs[m];
            buf[n - m] = coeffs[m].conj();
        }
        buf[nm] = Complex64::new(2.0 * coeffs[nm].re, 0.0);
        self.ifft.process(&mut buf);
        buf.iter().map(|b| b.re).collect()
    }

    /// Radial interpolation weights at an arbitrary radius `r` (any sign),
    /// returned as (even, odd) folded weights over the positive nodes.
    pub fn radial_interp_weights(&self, r: f64) -> (Array1<f64>, Array1<f64>) {
        let n = self.n_r;
        let deg = 2 * n - 1;
        let l = lagrange_basis(&self.cheb, &self.bary, r);
        let mut even = Array1::zeros(n);
        let mut odd = Array1::zeros(n);
        for i in 0..n {
            let j = n - 1 - i;
            even[i] = l[j] + l[deg - j];
            odd[i] = l[j] - l[deg - j];
        }
        (even, odd)
    }
}

/// Chebyshev-Lobatto differentiation matrix on the given (descending) nodes.
fn cheb_diff(x: &[f64]) -> Array2<f64> {
    let n = x.len();
    let deg = n - 1;
    let c = |j: usize| {
        let s = if j % 2 == 0 { 1.0 } else { -1.0 };
        if j == 0 || j == deg {
            2.0 * s
        } else {
            s
        }
    };
    let mut d = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            if i != j {
                d[[i, j]] = c(i) / c(j) / (x[i] - x[j]);
            }
        }
    }
    for i in 0..n {
        let s: f64 = (0..n).filter(|&j| j != i).map(|j| d[[i, j]]).sum();
        d[[i, i]] = -s;
    }
    d
}

/// Values of all Lagrange basis polynomials at `x` (barycentric form).
fn lagrange_basis(nodes: &[f64], bary: &[f64], x: f64) -> Vec<f64> {
    let mut out = vec![0.0; nodes.len()];
    if let Some(k) = nodes.iter().position(|&xk| xk == x) {
        out[k] = 1.0;
        return out;
    }
    let mut denom = 0.0;
    for (k, (xk, bk)) in nodes.iter().zip(bary).enumerate() {
        let t = bk / (x - xk);
        out[k] = t;
        denom += t;
    }
    out.iter_mut().for_each(|v| *v /= denom);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(DiskGrid::new(7, 8).is_err());
        assert!(DiskGrid::new(10, 8).is_ok());
        assert!(DiskGrid::new(16, 6).is_err());
    }

    #[test]
    fn nodes_are_increasing_and_end_at_one() {
        let g = DiskGrid::new(16, 12).unwrap();
        assert!(g.radii().windows(2).all(|w| w[0] < w[1]));
        assert!(g.radii()[0] > 0.0);
        assert_eq!(*g.radii().last().unwrap(), 1.0);
    }

    #[test]
    fn quadrature_of_one_and_r_squared() {
        let g = DiskGrid::new(16, 12).unwrap();
        assert!(g.radial_weights().iter().all(|w| *w > 0.0));
        let area: f64 = 2.0 * PI * g.radial_weights().iter().sum::<f64>();
        assert!((area - PI).abs() < 1e-12 * PI);
        let r2: f64 = 2.0
            * PI
            * g.radial_weights()
                .iter()
                .zip(g.radii())
                .map(|(w, r)| w * r * r)
                .sum::<f64>();
        assert!((r2 - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn ring_transform_roundtrip() {
        let g = DiskGrid::new(12, 8).unwrap();
        let vals: Vec<f64> = g
            .theta()
            .iter()
            .map(|t| 0.3 + (2.0 * t).cos() - 0.7 * (5.0 * t).sin() + (6.0 * t).cos())
            .collect();
        let c = g.forward_ring(&vals);
        assert!((c[2].re - 0.5).abs() < 1e-14);
        assert!((c[6].re - 0.5).abs() < 1e-14);
        let back = g.inverse_ring(&c);
        for (a, b) in vals.iter().zip(&back) {
            assert!((a - b).abs() < 1e-13);
        }
    }
}
