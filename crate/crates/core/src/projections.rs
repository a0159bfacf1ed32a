//! Leray-Hodge projections, the operators `L = id + D^2 f` and `L1 = P L`,
//! and the Laplacian pulled back by a map of the disk.

use crate::disk_field::calculus::Hessian;
use crate::disk_field::elliptic::solve_neumann_projected;
use crate::disk_field::{
    divergence, gradient, hessian, laplacian, restrict_boundary, solve_dirichlet, BoundaryFunction,
    DiskMap, ScalarField, VectorField,
};
use crate::error::{Error, Result};
use crate::tolerances::Tolerances;

/// `w = gradient_part + solenoidal_part`.
#[derive(Debug, Clone)]
pub struct HodgeSplit {
    pub gradient_part: VectorField,
    pub solenoidal_part: VectorField,
}

/// Potential `g` with `Q w = grad g`: `lap g = div w`, `d_n g = <w, nu>`,
/// zero mean.
pub fn hodge_potential(w: &VectorField) -> ScalarField {
    let g = w.grid();
    let flux = BoundaryFunction::from_samples(g, &w.normal_component());
    solve_neumann_projected(&divergence(w), &flux)
}

pub fn hodge_q(w: &VectorField) -> VectorField {
    gradient(&hodge_potential(w))
}

pub fn hodge_p(w: &VectorField) -> VectorField {
    w - &hodge_q(w)
}

pub fn hodge_split(w: &VectorField) -> HodgeSplit {
    let gradient_part = hodge_q(w);
    let solenoidal_part = w - &gradient_part;
    HodgeSplit {
        gradient_part,
        solenoidal_part,
    }
}

/// `(id + D^2 f) w`.
pub fn apply_l(f: &ScalarField, w: &VectorField) -> VectorField {
    apply_l_hessian(&hessian(f), w)
}

pub fn apply_l_hessian(h: &Hessian, w: &VectorField) -> VectorField {
    w + &h.apply(w)
}

const CONTRACTION_WINDOW: usize = 50;
const MAX_ITER: usize = 2000;

/// Solves `P (L w) = target` for `w` in the image of `P`, iterating
/// `w <- P(target - D^2 f w)`.
pub fn solve_l1_inverse(f: &ScalarField, target: &VectorField, tol: &Tolerances) -> Result<VectorField> {
    solve_l1_inverse_hessian(&hessian(f), target, tol)
}

pub fn solve_l1_inverse_hessian(
    h: &Hessian,
    target: &VectorField,
    tol: &Tolerances,
) -> Result<VectorField> {
    let target = hodge_p(target);
    let scale = 1.0f64.max(target.max_abs());
    let mut w = target.clone();
    let mut history = Vec::new();
    for it in 0..MAX_ITER {
        let next = hodge_p(&(&target - &h.apply(&w)));
        let res = (&next - &w).max_abs();
        w = next;
        if res <= tol.tol_l1 * scale {
            return Ok(w);
        }
        if !res.is_finite()
            || (it >= CONTRACTION_WINDOW && res > 0.5 * history[it - CONTRACTION_WINDOW])
        {
            return Err(Error::NoConvergence {
                what: "L1 inversion",
                iterations: it + 1,
                residual: res,
            });
        }
        history.push(res);
    }
    Err(Error::NoConvergence {
        what: "L1 inversion",
        iterations: MAX_ITER,
        residual: *history.last().unwrap_or(&f64::NAN),
    })
}

/// Metric data of a map `xi`: `a = (D xi)^-1 (D xi)^-T` and `grad log J`.
#[derive(Debug, Clone)]
pub struct PulledBackMetric {
    pub axx: ScalarField,
    pub axy: ScalarField,
    pub ayy: ScalarField,
    pub grad_log_j: VectorField,
    /// `(D xi)^-1`, stored row-major.
    pub inv: [ScalarField; 4],
}

impl PulledBackMetric {
    pub fn new(xi: &DiskMap) -> Self {
        let j = xi.jacobian();
        let det = j.determinant();
        // (D xi)^-1 = [[d, -b], [-c, a]] / det
        let ixx = j.yy.zip_map(&det, |v, d| v / d);
        let ixy = j.xy.zip_map(&det, |v, d| -v / d);
        let iyx = j.yx.zip_map(&det, |v, d| -v / d);
        let iyy = j.xx.zip_map(&det, |v, d| v / d);
        let axx = &(&ixx * &ixx) + &(&ixy * &ixy);
        let axy = &(&ixx * &iyx) + &(&ixy * &iyy);
        let ayy = &(&iyx * &iyx) + &(&iyy * &iyy);
        let grad_log_j = gradient(&det.map(f64::ln));
        Self {
            axx,
            axy,
            ayy,
            grad_log_j,
            inv: [ixx, ixy, iyx, iyy],
        }
    }

    /// `(D xi)^-T v`: maps a gradient in reference coordinates to the
    /// physical gradient.
    pub fn inverse_transpose_apply(&self, v: &VectorField) -> VectorField {
        let [ixx, ixy, iyx, iyy] = &self.inv;
        VectorField {
            x: &(ixx * &v.x) + &(iyx * &v.y),
            y: &(ixy * &v.x) + &(iyy * &v.y),
        }
    }

    /// `(1/J) div(J a grad g)`.
    pub fn apply(&self, g: &ScalarField) -> ScalarField {
        let gr = gradient(g);
        let fx = &(&self.axx * &gr.x) + &(&self.axy * &gr.y);
        let fy = &(&self.axy * &gr.x) + &(&self.ayy * &gr.y);
        // a - I part in divergence form keeps the leading term exactly the modal Laplacian
        let dx = &fx - &gr.x;
        let dy = &fy - &gr.y;
        let lower = &(&self.grad_log_j.x * &fx) + &(&self.grad_log_j.y * &fy);
        &(&laplacian(g) + &divergence(&VectorField { x: dx, y: dy })) + &lower
    }
}

/// `Delta_xi g = (lap (g o xi^-1)) o xi`.
pub fn pulled_back_laplacian(xi: &DiskMap, g: &ScalarField) -> ScalarField {
    PulledBackMetric::new(xi).apply(g)
}

const PULLBACK_MAX_ITER: usize = 200;

/// Solves `Delta_xi g = rhs`, `g = bdata` on the circle, by the iteration
/// `g <- g + lap_0^-1 (rhs - Delta_xi g)`.
pub fn solve_pulled_back_laplacian(
    xi: &DiskMap,
    rhs: &ScalarField,
    bdata: &BoundaryFunction,
    tol: &Tolerances,
) -> Result<ScalarField> {
    solve_with_metric(&PulledBackMetric::new(xi), rhs, bdata, tol)
}

pub fn solve_with_metric(
    metric: &PulledBackMetric,
    rhs: &ScalarField,
    bdata: &BoundaryFunction,
    tol: &Tolerances,
) -> Result<ScalarField> {
    let grid = rhs.grid();
    let zero = BoundaryFunction::zeros(grid.n_theta());
    let scale = 1.0f64.max(rhs.max_abs());
    let mut g = solve_dirichlet(rhs, bdata)?;
    let mut prev = f64::INFINITY;
    for it in 0..PULLBACK_MAX_ITER {
        let r = rhs - &metric.apply(&g);
        let res = r.max_abs_interior();
        if res <= tol.tol_ell * scale {
            return Ok(g);
        }
        if !res.is_finite() || (it > 5 && res > prev) {
            return Err(Error::NoConvergence {
                what: "pulled-back Laplacian",
                iterations: it,
                residual: res,
            });
        }
        prev = res;
        g = &g + &solve_dirichlet(&r, &zero)?;
    }
    Err(Error::NoConvergence {
        what: "pulled-back Laplacian",
        iterations: PULLBACK_MAX_ITER,
        residual: prev,
    })
}

/// Trace of a field, convenience for boundary checks.
pub fn boundary_trace(f: &ScalarField) -> BoundaryFunction {
    restrict_boundary(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disk_field::DiskGrid;
    use std::sync::Arc;

    fn grid() -> Arc<DiskGrid> {
        DiskGrid::new(16, 12).unwrap()
    }

    #[test]
    fn q_examples() {
        let g = grid();
        let radial = VectorField::from_fn(&g, |x, y| [x, y]);
        let rot = VectorField::from_fn(&g, |x, y| [-y, x]);
        assert!((&hodge_q(&radial) - &radial).max_abs() < 1e-10);
        assert!(hodge_q(&rot).max_abs() < 1e-10);
        assert!((&hodge_q(&(&radial + &rot)) - &radial).max_abs() < 1e-10);
    }

    #[test]
    fn p_examples() {
        let g = grid();
        let radial = VectorField::from_fn(&g, |x, y| [x, y]);
        let rot = VectorField::from_fn(&g, |x, y| [-y, x]);
        assert!((&hodge_p(&rot) - &rot).max_abs() < 1e-10);
        assert!(hodge_p(&radial).max_abs() < 1e-10);
    }

    #[test]
    fn l_examples() {
        let g = grid();
        let w = VectorField::from_fn(&g, |x, y| [x * y, 1.0 - x]);
        assert!((&apply_l(&ScalarField::zeros(&g), &w) - &w).max_abs() < 1e-14);
        let f = ScalarField::from_fn(&g, |x, y| 0.5 * (x * x + y * y));
        assert!((&apply_l(&f, &w) - &w.scale(2.0)).max_abs() < 1e-11);
        // f = eps x^3, D^2 f = diag(6 eps x, 0)
        let eps = 0.01;
        let f = ScalarField::from_fn(&g, |x, _| eps * x * x * x);
        let exact = VectorField::from_fn(&g, |x, y| [x * y * (1.0 + 6.0 * eps * x), 1.0 - x]);
        assert!((&apply_l(&f, &w) - &exact).max_abs() < 1e-10);
    }

    #[test]
    fn l1_inverse_at_zero_is_identity() {
        let g = grid();
        let t = VectorField::from_fn(&g, |x, y| [-y * (1.0 - x), x * (1.0 - x) + 0.3]);
        let t = hodge_p(&t);
        let w = solve_l1_inverse(&ScalarField::zeros(&g), &t, &Tolerances::default()).unwrap();
        assert!((&w - &t).max_abs() < 1e-12);
    }

    #[test]
    fn pulled_back_identity_matches_dirichlet() {
        let g = grid();
        let rhs = ScalarField::from_fn(&g, |x, y| x * y + 1.0);
        let b = BoundaryFunction::from_fn(&g, |t| (2.0 * t).cos());
        let id = DiskMap::identity(&g);
        let a = solve_pulled_back_laplacian(&id, &rhs, &b, &Tolerances::default()).unwrap();
        let d = solve_dirichlet(&rhs, &b).unwrap();
        assert!((&a - &d).max_abs() < 1e-12);
    }

    #[test]
    fn pulled_back_rotation_radial_rhs() {
        let g = grid();
        let rhs = ScalarField::from_fn(&g, |x, y| 1.0 + x * x + y * y);
        let zero = BoundaryFunction::zeros(16);
        let rot = DiskMap::rotation(&g, 0.7);
        let a = solve_pulled_back_laplacian(&rot, &rhs, &zero, &Tolerances::default()).unwrap();
        let d = solve_dirichlet(&rhs, &zero).unwrap();
        assert!((&a - &d).max_abs() < 1e-10);
    }
}
