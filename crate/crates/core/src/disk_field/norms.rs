//! Sobolev norms on the disk and on its boundary circle.

use super::calculus::gradient;
use super::field::{BoundaryFunction, ScalarField, VectorField};
use crate::error::{Error, Result};

pub const MAX_DISK_ORDER: u32 = 4;

/// `(sum_{|a| <= s} ||D^a f||^2)^(1/2)` for integer `s <= 4`.
pub fn sobolev_norm_disk(f: &ScalarField, s: u32) -> Result<f64> {
    if s > MAX_DISK_ORDER {
        return Err(Error::UnsupportedOrder(s));
    }
    // level[b] = d_x^(k-b) d_y^b f
    let mut level = vec![f.clone()];
    let mut total = f.dot(f);
    for _ in 0..s {
        let grads: Vec<_> = level.iter().map(gradient).collect();
        let mut next: Vec<ScalarField> = grads.iter().map(|g| g.x.clone()).collect();
        next.push(grads.last().expect("nonempty").y.clone());
        total += next.iter().map(|d| d.dot(d)).sum::<f64>();
        level = next;
    }
    Ok(total.max(0.0).sqrt())
}

pub fn sobolev_norm_vector(w: &VectorField, s: u32) -> Result<f64> {
    let a = sobolev_norm_disk(&w.x, s)?;
    let b = sobolev_norm_disk(&w.y, s)?;
    Ok(a.hypot(b))
}

/// `(2 pi sum_m (1 + m^2)^s |c_m|^2)^(1/2)`; fractional `s` allowed.
pub fn sobolev_norm_boundary(b: &BoundaryFunction, s: f64) -> f64 {
    let c = b.coefficients();
    let mut total = c[0].norm_sqr();
    for (m, cm) in c.iter().enumerate().skip(1) {
        total += 2.0 * (1.0 + (m * m) as f64).powf(s) * cm.norm_sqr();
    }
    (2.0 * std::f64::consts::PI * total).sqrt()
}

/// Trace on the unit circle.
pub fn restrict_boundary(f: &ScalarField) -> BoundaryFunction {
    BoundaryFunction::from_samples(f.grid(), &f.boundary_samples())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disk_field::elliptic::harmonic_extension;
    use crate::disk_field::grid::DiskGrid;
    use std::f64::consts::PI;

    #[test]
    fn disk_norm_examples() {
        let g = DiskGrid::new(16, 12).unwrap();
        assert_eq!(sobolev_norm_disk(&ScalarField::zeros(&g), 3).unwrap(), 0.0);
        let one = ScalarField::constant(&g, 1.0);
        assert!((sobolev_norm_disk(&one, 0).unwrap() - PI.sqrt()).abs() < 1e-12);
        let x = ScalarField::from_fn(&g, |x, _| x);
        let n1 = sobolev_norm_disk(&x, 1).unwrap();
        assert!((n1 - (PI / 4.0 + PI).sqrt()).abs() < 1e-10);
        assert!(matches!(sobolev_norm_disk(&x, 5), Err(Error::UnsupportedOrder(5))));
    }

    #[test]
    fn boundary_norm_examples() {
        let g = DiskGrid::new(16, 8).unwrap();
        assert_eq!(sobolev_norm_boundary(&BoundaryFunction::zeros(16), 1.5), 0.0);
        let c = BoundaryFunction::from_fn(&g, |t| t.cos());
        assert!((sobolev_norm_boundary(&c, 0.0) - PI.sqrt()).abs() < 1e-12);
        let c3 = BoundaryFunction::from_fn(&g, |t| (3.0 * t).cos());
        let expected = PI.sqrt() * 10f64.powf(0.25);
        assert!((sobolev_norm_boundary(&c3, 0.5) - expected).abs() < 1e-12);
    }

    #[test]
    fn restriction_examples() {
        let g = DiskGrid::new(16, 12).unwrap();
        let f = ScalarField::from_polar(&g, |r, t| r.powi(3) * (3.0 * t).cos());
        let b = restrict_boundary(&f);
        let exact = BoundaryFunction::from_fn(&g, |t| (3.0 * t).cos());
        assert!((&b - &exact).max_abs_coefficient() < 1e-14);
        let bump = ScalarField::from_polar(&g, |r, _| 1.0 - r * r);
        assert!(restrict_boundary(&bump).max_abs_coefficient() < 1e-15);
        let h = BoundaryFunction::from_trig(16, &[0.1, 0.2, 0.0, -0.3], &[0.0, 0.0, 0.4, 0.0, 0.1]);
        assert!((&restrict_boundary(&harmonic_extension(&g, &h)) - &h).max_abs_coefficient() < 1e-12);
    }
}
