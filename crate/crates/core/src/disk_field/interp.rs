//! Spectral interpolation at arbitrary points and composition with maps.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;

use super::field::{ScalarField, VectorField};
use super::grid::DiskGrid;
use super::map::{DiskMap, MapKind};
use crate::error::{Error, Result};
use crate::tolerances::Tolerances;

/// Radius beyond which a query point counts as outside the disk.
pub const DOMAIN_SLACK: f64 = 1e-12;
const SNAP: f64 = 1e-14;

/// Interpolant of one or more fields on a common grid, sharing the radial
/// weights and angular exponentials across fields.
#[derive(Debug, Clone)]
pub struct Interpolant {
    grid: Arc<DiskGrid>,
    coeffs: Vec<Array2<Complex64>>,
    values: Vec<Array2<f64>>,
}

impl Interpolant {
    pub fn new(fields: &[&ScalarField]) -> Self {
        assert!(!fields.is_empty());
        let grid = fields[0].grid().clone();
        Self {
            coeffs: fields.iter().map(|f| f.spectral()).collect(),
            values: fields.iter().map(|f| f.values().clone()).collect(),
            grid,
        }
    }

    pub fn n_fields(&self) -> usize {
        self.coeffs.len()
    }

    fn snap(&self, r: f64, theta: f64) -> Option<(usize, usize)> {
        let g = &self.grid;
        let n = g.n_theta() as f64;
        let t = theta.rem_euclid(2.0 * PI);
        let jf = (t * n / (2.0 * PI)).round();
        if (t - jf * 2.0 * PI / n).abs() > SNAP {
            return None;
        }
        let j = (jf as usize) % g.n_theta();
        let i = g.radii().iter().position(|ri| (ri - r).abs() <= SNAP)?;
        Some((i, j))
    }

    /// Evaluates every field at `p`, checking `|p| <= 1 + slack`; points in
    /// the slack band are pulled back onto the circle.
    pub fn eval_with_slack(&self, p: [f64; 2], slack: f64, out: &mut [f64]) -> Result<()> {
        let r = p[0].hypot(p[1]);
        if !r.is_finite() || r > 1.0 + slack {
            return Err(Error::PointOutsideDomain { x: p[0], y: p[1] });
        }
        let theta = p[1].atan2(p[0]);
        self.eval_polar(r.min(1.0), theta, out);
        Ok(())
    }

    pub fn eval(&self, p: [f64; 2], out: &mut [f64]) -> Result<()> {
        self.eval_with_slack(p, DOMAIN_SLACK, out)
    }

    /// Evaluates without a domain check; points slightly outside the disk
    /// are extrapolated polynomially.
    pub(crate) fn eval_unchecked(&self, p: [f64; 2], out: &mut [f64]) {
        let r = p[0].hypot(p[1]);
        self.eval_polar(r, p[1].atan2(p[0]), out);
    }

    fn eval_polar(&self, r: f64, theta: f64, out: &mut [f64]) {
        if let Some((i, j)) = self.snap(r, theta) {
            for (o, v) in out.iter_mut().zip(&self.values) {
                *o = v[[i, j]];
            }
            return;
        }
        let g = &self.grid;
        let (even, odd) = g.radial_interp_weights(r);
        let nm = g.n_modes();
        let step = Complex64::from_polar(1.0, theta);
        for (o, c) in out.iter_mut().zip(&self.coeffs) {
            let mut e = Complex64::new(1.0, 0.0);
            let mut acc = 0.0;
            for m in 0..=nm {
                let w = if m % 2 == 0 { &even } else { &odd };
                let mut a = Complex64::new(0.0, 0.0);
                for (k, wk) in w.iter().enumerate() {
                    a += c[[k, m]] * *wk;
                }
                acc += if m == 0 { a.re } else { 2.0 * (a * e).re };
                e *= step;
            }
            *o = acc;
        }
    }
}

/// Values of `f` at the given points.
pub fn evaluate_at(f: &ScalarField, points: &[[f64; 2]]) -> Result<Vec<f64>> {
    let it = Interpolant::new(&[f]);
    let mut buf = [0.0];
    points
        .iter()
        .map(|p| {
            it.eval(*p, &mut buf)?;
            Ok(buf[0])
        })
        .collect()
}

fn require_diffeo(g: &DiskMap) -> Result<()> {
    if g.kind() != MapKind::Diffeomorphism {
        return Err(Error::InvalidMap("composition needs a map of the disk onto itself".into()));
    }
    Ok(())
}

/// Band outside the disk where intermediate Runge-Kutta stages of a map may
/// land; fields are extrapolated polynomially there.
pub(crate) const STAGE_SLACK: f64 = 1e-2;

fn compose_many(fields: &[&ScalarField], g: &DiskMap) -> Result<Vec<ScalarField>> {
    require_diffeo(g)?;
    sample_many(fields, g, false)
}

fn sample_many(fields: &[&ScalarField], g: &DiskMap, extrapolate: bool) -> Result<Vec<ScalarField>> {
    let grid = fields[0].grid();
    let it = Interpolant::new(fields);
    let slack = Tolerances::default().tol_bdry;
    let n = fields.len();
    let mut out: Vec<Array2<f64>> = vec![Array2::zeros((grid.n_r(), grid.n_theta())); n];
    let mut buf = vec![0.0; n];
    let pts = g.points();
    for (idx, p) in pts.iter().enumerate() {
        let (i, j) = (idx / grid.n_theta(), idx % grid.n_theta());
        if extrapolate {
            let r = p[0].hypot(p[1]);
            if !(r <= 1.0 + STAGE_SLACK) {
                return Err(Error::PointOutsideDomain { x: p[0], y: p[1] });
            }
            it.eval_unchecked(*p, &mut buf);
        } else {
            it.eval_with_slack(*p, slack, &mut buf)?;
        }
        for (o, b) in out.iter_mut().zip(&buf) {
            o[[i, j]] = *b;
        }
    }
    Ok(out
        .into_iter()
        .map(|v| ScalarField::from_values_unchecked(grid.clone(), v))
        .collect())
}

/// `f o g` sampled at the grid nodes.
pub fn compose(f: &ScalarField, g: &DiskMap) -> Result<ScalarField> {
    Ok(compose_many(&[f], g)?.pop().expect("one field"))
}

pub fn compose_vector(w: &VectorField, g: &DiskMap) -> Result<VectorField> {
    let mut v = compose_many(&[&w.x, &w.y], g)?;
    let y = v.pop().expect("two fields");
    let x = v.pop().expect("two fields");
    Ok(VectorField { x, y })
}

/// Like [`compose_vector`] but tolerates maps that leave the disk slightly,
/// as the intermediate stages of a time step do.
pub(crate) fn compose_vector_stage(w: &VectorField, g: &DiskMap) -> Result<VectorField> {
    let mut v = sample_many(&[&w.x, &w.y], g, true)?;
    let y = v.pop().expect("two fields");
    let x = v.pop().expect("two fields");
    Ok(VectorField { x, y })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid() -> Arc<DiskGrid> {
        DiskGrid::new(16, 12).unwrap()
    }

    #[test]
    fn evaluates_linear_function() {
        let g = grid();
        let f = ScalarField::from_fn(&g, |x, _| x);
        let v = evaluate_at(&f, &[[0.3, 0.4]]).unwrap();
        assert!((v[0] - 0.3).abs() < 1e-14);
    }

    #[test]
    fn node_queries_are_bit_exact() {
        let g = grid();
        let f = ScalarField::from_fn(&g, |x, y| (3.0 * x).sin() + y * y * x);
        let v = evaluate_at(&f, &g.nodes()).unwrap();
        for (a, b) in v.iter().zip(f.values().iter()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn quartic_harmonic_at_random_points() {
        let g = grid();
        let f = ScalarField::from_polar(&g, |r, t| r.powi(4) * (4.0 * t).cos());
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pts: Vec<[f64; 2]> = (0..100)
            .map(|_| {
                let r: f64 = rng.gen::<f64>().sqrt();
                let t: f64 = rng.gen::<f64>() * 2.0 * PI;
                [r * t.cos(), r * t.sin()]
            })
            .collect();
        let v = evaluate_at(&f, &pts).unwrap();
        for (p, val) in pts.iter().zip(&v) {
            let (r, t) = (p[0].hypot(p[1]), p[1].atan2(p[0]));
            assert!((val - r.powi(4) * (4.0 * t).cos()).abs() < 1e-8);
        }
    }

    #[test]
    fn rejects_points_outside() {
        let g = grid();
        let f = ScalarField::zeros(&g);
        assert!(matches!(
            evaluate_at(&f, &[[1.0 + 1e-9, 0.0]]),
            Err(Error::PointOutsideDomain { .. })
        ));
        assert!(evaluate_at(&f, &[[1.0 + 1e-13, 0.0]]).is_ok());
    }

    #[test]
    fn compose_with_identity_and_rotation() {
        let g = grid();
        let f = ScalarField::from_fn(&g, |x, y| x * y + (x - 0.2 * y).cos());
        let id = DiskMap::identity(&g);
        assert!((&compose(&f, &id).unwrap() - &f).max_abs() < 1e-13);
        let a = 0.37;
        let x = ScalarField::from_fn(&g, |x, _| x);
        let rot = DiskMap::rotation(&g, a);
        let exact = ScalarField::from_fn(&g, |x, y| x * a.cos() - y * a.sin());
        assert!((&compose(&x, &rot).unwrap() - &exact).max_abs() < 1e-10);
    }
}
