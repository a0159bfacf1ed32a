use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use ndarray::{Array2, Zip};
use num_complex::Complex64;

use super::grid::DiskGrid;
use crate::error::{Error, Result};

/// Real function sampled on every `(r_i, theta_j)` node of a [`DiskGrid`].
#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: Arc<DiskGrid>,
    values: Array2<f64>,
}

impl ScalarField {
    pub fn new(grid: Arc<DiskGrid>, values: Array2<f64>) -> Result<Self> {
        if values.dim() != (grid.n_r(), grid.n_theta()) {
            return Err(Error::GridMismatch);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("scalar field"));
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_values_unchecked(grid: Arc<DiskGrid>, values: Array2<f64>) -> Self {
        Self { grid, values }
    }

    pub fn zeros(grid: &Arc<DiskGrid>) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: &Arc<DiskGrid>, c: f64) -> Self {
        Self {
            grid: grid.clone(),
            values: Array2::from_elem((grid.n_r(), grid.n_theta()), c),
        }
    }

    /// Samples `f(x, y)` at every node.
    pub fn from_fn(grid: &Arc<DiskGrid>, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = Array2::from_shape_fn((grid.n_r(), grid.n_theta()), |(i, j)| {
            let [x, y] = grid.node(i, j);
            f(x, y)
        });
        Self {
            grid: grid.clone(),
            values,
        }
    }

    /// Samples `f(r, theta)` at every node.
    pub fn from_polar(grid: &Arc<DiskGrid>, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = Array2::from_shape_fn((grid.n_r(), grid.n_theta()), |(i, j)| {
            f(grid.radii()[i], grid.theta()[j])
        });
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn from_spectral(grid: &Arc<DiskGrid>, coeffs: &Array2<Complex64>) -> Self {
        Self {
            grid: grid.clone(),
            values: grid.inverse(coeffs),
        }
    }

    pub fn grid(&self) -> &Arc<DiskGrid> {
        &self.grid
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn into_values(self) -> Array2<f64> {
        self.values
    }

    pub fn spectral(&self) -> Array2<Complex64> {
        self.grid.forward(&self.values)
    }

    pub fn check_grid(&self, other: &ScalarField) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || self.grid.same_shape(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.mapv(f),
        }
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = self.values.clone();
        Zip::from(&mut values)
            .and(&other.values)
            .for_each(|a, &b| *a = f(*a, b));
        Self {
            grid: self.grid.clone(),
            values,
        }
    }

    pub fn scale(&self, a: f64) -> Self {
        self.map(|v| a * v)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Max norm over nodes with `r < 1`.
    pub fn max_abs_interior(&self) -> f64 {
        let n = self.grid.n_r() - 1;
        self.values
            .rows()
            .into_iter()
            .take(n)
            .flat_map(|row| row.into_iter().copied())
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Quadrature of the field over the unit disk.
    pub fn integrate(&self) -> f64 {
        let w = self.grid.radial_weights();
        let dt = 2.0 * PI / self.grid.n_theta() as f64;
        self.values
            .rows()
            .into_iter()
            .zip(w)
            .map(|(row, wi)| wi * row.sum())
            .sum::<f64>()
            * dt
    }

    pub fn mean(&self) -> f64 {
        self.integrate() / PI
    }

    /// `L^2(disk)` inner product.
    pub fn dot(&self, other: &ScalarField) -> f64 {
        self.zip_map(other, |a, b| a * b).integrate()
    }

    pub fn l2_norm(&self) -> f64 {
        self.dot(self).max(0.0).sqrt()
    }

    /// Samples on the outer ring `r = 1`.
    pub fn boundary_samples(&self) -> Vec<f64> {
        self.values.row(self.grid.n_r() - 1).to_vec()
    }

    /// Parity defect: largest `|c_m(r_0)| / (r_0^min(m,2) * scale)` over
    /// `m >= 1` at the innermost node. Smooth fields stay O(1); profiles that
    /// do not vanish at the origin grow like `1 / r_0`.
    pub fn parity_defect(&self) -> f64 {
        let c = self.spectral();
        let r0 = self.grid.radii()[0];
        let scale = c.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        if scale == 0.0 {
            return 0.0;
        }
        (1..=self.grid.n_modes())
            .map(|m| c[[0, m]].norm() / (r0.powi(m.min(2) as i32) * scale))
            .fold(0.0, f64::max)
    }

    /// Checks the parity invariant within `tol` (relative units).
    pub fn check_parity(&self, tol: f64) -> bool {
        self.parity_defect() <= tol
    }
}

impl Add for &ScalarField {
    type Output = ScalarField;
    fn add(self, rhs: &ScalarField) -> ScalarField {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl Sub for &ScalarField {
    type Output = ScalarField;
    fn sub(self, rhs: &ScalarField) -> ScalarField {
        self.zip_map(rhs, |a, b| a - b)
    }
}

impl Mul for &ScalarField {
    type Output = ScalarField;
    fn mul(self, rhs: &ScalarField) -> ScalarField {
        self.zip_map(rhs, |a, b| a * b)
    }
}

impl Neg for &ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        self.map(|v| -v)
    }
}

/// Cartesian vector field `(x_comp, y_comp)` on one grid.
#[derive(Debug, Clone)]
pub struct VectorField {
    pub x: ScalarField,
    pub y: ScalarField,
}

impl VectorField {
    pub fn new(x: ScalarField, y: ScalarField) -> Result<Self> {
        x.check_grid(&y)?;
        Ok(Self { x, y })
    }

    pub fn zeros(grid: &Arc<DiskGrid>) -> Self {
        Self {
            x: ScalarField::zeros(grid),
            y: ScalarField::zeros(grid),
        }
    }

    pub fn from_fn(grid: &Arc<DiskGrid>, f: impl Fn(f64, f64) -> [f64; 2]) -> Self {
        Self {
            x: ScalarField::from_fn(grid, |x, y| f(x, y)[0]),
            y: ScalarField::from_fn(grid, |x, y| f(x, y)[1]),
        }
    }

    pub fn grid(&self) -> &Arc<DiskGrid> {
        self.x.grid()
    }

    pub fn scale(&self, a: f64) -> Self {
        Self {
            x: self.x.scale(a),
            y: self.y.scale(a),
        }
    }

    /// `self + a * other`
    pub fn axpy(&self, a: f64, other: &VectorField) -> Self {
        Self {
            x: self.x.zip_map(&other.x, |u, v| u + a * v),
            y: self.y.zip_map(&other.y, |u, v| u + a * v),
        }
    }

    pub fn dot(&self, other: &VectorField) -> f64 {
        self.x.dot(&other.x) + self.y.dot(&other.y)
    }

    pub fn l2_norm(&self) -> f64 {
        self.dot(self).max(0.0).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.x.max_abs().max(self.y.max_abs())
    }

    /// Pointwise Euclidean length.
    pub fn magnitude(&self) -> ScalarField {
        self.x.zip_map(&self.y, |a, b| a.hypot(b))
    }

    /// `<w, nu>` on the outer ring.
    pub fn normal_component(&self) -> Vec<f64> {
        let g = self.grid();
        let bx = self.x.boundary_samples();
        let by = self.y.boundary_samples();
        (0..g.n_theta())
            .map(|j| bx[j] * g.cos_theta()[j] + by[j] * g.sin_theta()[j])
            .collect()
    }

    /// Node-wise samples as points.
    pub fn samples(&self) -> Vec<[f64; 2]> {
        self.x
            .values()
            .iter()
            .zip(self.y.values().iter())
            .map(|(a, b)| [*a, *b])
            .collect()
    }

    pub fn from_samples(grid: &Arc<DiskGrid>, pts: &[[f64; 2]]) -> Self {
        let shape = (grid.n_r(), grid.n_theta());
        let xs = Array2::from_shape_vec(shape, pts.iter().map(|p| p[0]).collect())
            .expect("sample count matches grid");
        let ys = Array2::from_shape_vec(shape, pts.iter().map(|p| p[1]).collect())
            .expect("sample count matches grid");
        Self {
            x: ScalarField::from_values_unchecked(grid.clone(), xs),
            y: ScalarField::from_values_unchecked(grid.clone(), ys),
        }
    }
}

impl Add for &VectorField {
    type Output = VectorField;
    fn add(self, rhs: &VectorField) -> VectorField {
        VectorField {
            x: &self.x + &rhs.x,
            y: &self.y + &rhs.y,
        }
    }
}

impl Sub for &VectorField {
    type Output = VectorField;
    fn sub(self, rhs: &VectorField) -> VectorField {
        VectorField {
            x: &self.x - &rhs.x,
            y: &self.y - &rhs.y,
        }
    }
}

/// Real function on the unit circle held as Fourier coefficients
/// `c_m`, `0 <= m <= n_theta/2`; negative modes are implied by
/// `c_{-m} = conj(c_m)` and the Nyquist coefficient is stored halved and real.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryFunction {
    coeffs: Vec<Complex64>,
}

impl BoundaryFunction {
    pub fn from_coefficients(mut coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() < 5 {
            return Err(Error::InvalidGrid("boundary function needs n_theta >= 8".into()));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite("boundary function"));
        }
        coeffs[0].im = 0.0;
        let last = coeffs.len() - 1;
        coeffs[last].im = 0.0;
        Ok(Self { coeffs })
    }

    pub fn zeros(n_theta: usize) -> Self {
        Self {
            coeffs: vec![Complex64::new(0.0, 0.0); n_theta / 2 + 1],
        }
    }

    pub fn from_samples(grid: &DiskGrid, samples: &[f64]) -> Self {
        Self {
            coeffs: grid.forward_ring(samples),
        }
    }

    /// Samples `f(theta)` at the grid angles and transforms.
    pub fn from_fn(grid: &DiskGrid, f: impl Fn(f64) -> f64) -> Self {
        let s: Vec<f64> = grid.theta().iter().map(|t| f(*t)).collect();
        Self::from_samples(grid, &s)
    }

    /// Real trigonometric polynomial `a_0 + sum_m (a_m cos m t + b_m sin m t)`.
    pub fn from_trig(n_theta: usize, cos: &[f64], sin: &[f64]) -> Self {
        let mut b = Self::zeros(n_theta);
        let nm = n_theta / 2;
        for (m, a) in cos.iter().enumerate().take(nm + 1) {
            if m == 0 {
                b.coeffs[0].re += a;
            } else {
                b.coeffs[m].re += 0.5 * a;
            }
        }
        for (m, s) in sin.iter().enumerate().take(nm).skip(1) {
            b.coeffs[m].im -= 0.5 * s;
        }
        b
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn n_theta(&self) -> usize {
        2 * (self.coeffs.len() - 1)
    }

    pub fn max_mode(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn evaluate(&self, theta: f64) -> f64 {
        let mut s = self.coeffs[0].re;
        for (m, c) in self.coeffs.iter().enumerate().skip(1) {
            let e = Complex64::from_polar(1.0, m as f64 * theta);
            s += 2.0 * (c * e).re;
        }
        s
    }

    pub fn samples(&self, grid: &DiskGrid) -> Vec<f64> {
        grid.inverse_ring(&self.coeffs)
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        }
    }

    pub fn scale(&self, a: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * a).collect(),
        }
    }

    /// `d/dtheta`, Nyquist mode dropped.
    pub fn derivative(&self) -> Self {
        let nm = self.max_mode();
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(m, c)| {
                if m == nm {
                    Complex64::new(0.0, 0.0)
                } else {
                    c * Complex64::new(0.0, m as f64)
                }
            })
            .collect();
        Self { coeffs }
    }

    /// Mean value over the circle.
    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    /// `int_{S^1} b dtheta`.
    pub fn integrate(&self) -> f64 {
        2.0 * PI * self.coeffs[0].re
    }

    /// Truncates or zero-pads to another sample count.
    pub fn resized(&self, n_theta: usize) -> Self {
        let nm = n_theta / 2;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); nm + 1];
        for (c, s) in coeffs.iter_mut().zip(&self.coeffs) {
            *c = *s;
        }
        coeffs[nm].im = 0.0;
        Self { coeffs }
    }

    /// Max over the sample angles of a grid.
    pub fn max_abs(&self, grid: &DiskGrid) -> f64 {
        self.resized(grid.n_theta())
            .samples(grid)
            .iter()
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }
}

impl Add for &BoundaryFunction {
    type Output = BoundaryFunction;
    fn add(self, rhs: &BoundaryFunction) -> BoundaryFunction {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl Sub for &BoundaryFunction {
    type Output = BoundaryFunction;
    fn sub(self, rhs: &BoundaryFunction) -> BoundaryFunction {
        self.zip_map(rhs, |a, b| a - b)
    }
}
