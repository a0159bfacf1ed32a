//! Maps of the disk stored as identity plus displacement.

use std::sync::Arc;

use super::calculus::{jacobian, Jacobian};
use super::field::{ScalarField, VectorField};
use super::grid::DiskGrid;
use super::interp::Interpolant;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapKind {
    /// Onto the disk itself; boundary goes to the unit circle.
    Diffeomorphism,
    /// Into the plane.
    Embedding,
}

#[derive(Debug, Clone)]
pub struct DiskMap {
    displacement: VectorField,
    kind: MapKind,
}

const NEWTON_MAX: usize = 60;

impl DiskMap {
    pub fn new(displacement: VectorField, kind: MapKind) -> Self {
        Self { displacement, kind }
    }

    pub fn identity(grid: &Arc<DiskGrid>) -> Self {
        Self::new(VectorField::zeros(grid), MapKind::Diffeomorphism)
    }

    /// Counter-clockwise rotation by `alpha`.
    pub fn rotation(grid: &Arc<DiskGrid>, alpha: f64) -> Self {
        let (s, c) = alpha.sin_cos();
        Self::new(
            VectorField::from_fn(grid, |x, y| [c * x - s * y - x, s * x + c * y - y]),
            MapKind::Diffeomorphism,
        )
    }

    /// Map with the given node images.
    pub fn from_points(grid: &Arc<DiskGrid>, pts: &[[f64; 2]], kind: MapKind) -> Self {
        let nodes = grid.nodes();
        let d: Vec<[f64; 2]> = pts
            .iter()
            .zip(&nodes)
            .map(|(p, x)| [p[0] - x[0], p[1] - x[1]])
            .collect();
        Self::new(VectorField::from_samples(grid, &d), kind)
    }

    pub fn grid(&self) -> &Arc<DiskGrid> {
        self.displacement.grid()
    }

    pub fn kind(&self) -> MapKind {
        self.kind
    }

    pub fn with_kind(mut self, kind: MapKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn displacement(&self) -> &VectorField {
        &self.displacement
    }

    /// Images of the nodes, ring-major.
    pub fn points(&self) -> Vec<[f64; 2]> {
        let g = self.grid();
        g.nodes()
            .iter()
            .zip(self.displacement.samples())
            .map(|(x, d)| [x[0] + d[0], x[1] + d[1]])
            .collect()
    }

    /// The map's own components as fields, `x + d_x` and `y + d_y`.
    pub fn components(&self) -> VectorField {
        let g = self.grid();
        &VectorField::from_fn(g, |x, y| [x, y]) + &self.displacement
    }

    /// Derivative matrix `I + D d`.
    pub fn jacobian(&self) -> Jacobian {
        let mut j = jacobian(&self.displacement);
        j.xx = j.xx.map(|v| v + 1.0);
        j.yy = j.yy.map(|v| v + 1.0);
        j
    }

    /// Largest deviation of `|map|` from 1 on the outer ring.
    pub fn boundary_defect(&self) -> f64 {
        let g = self.grid();
        let n = g.n_theta();
        let pts = self.points();
        pts[(g.n_r() - 1) * n..]
            .iter()
            .fold(0.0, |m, p| m.max((p[0].hypot(p[1]) - 1.0).abs()))
    }

    /// Checks the kind invariants.
    pub fn validate(&self, tol_bdry: f64) -> Result<()> {
        if self.displacement.samples().iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
            return Err(Error::NonFinite("map displacement"));
        }
        if self.kind == MapKind::Diffeomorphism {
            let d = self.boundary_defect();
            if d > tol_bdry {
                return Err(Error::InvalidMap(format!(
                    "boundary leaves the unit circle by {d:e}"
                )));
            }
        }
        let det = jacobian_det(self);
        let min = det.values().iter().fold(f64::INFINITY, |m, v| m.min(*v));
        if min <= 0.0 {
            return Err(Error::InvalidMap(format!("Jacobian determinant {min:e}")));
        }
        Ok(())
    }

    /// Projects the outer ring radially onto the unit circle.
    pub fn renormalize_boundary(&mut self) {
        let g = self.grid().clone();
        let last = g.n_r() - 1;
        let mut dx = self.displacement.x.values().clone();
        let mut dy = self.displacement.y.values().clone();
        for j in 0..g.n_theta() {
            let [x, y] = g.node(last, j);
            let (px, py) = (x + dx[[last, j]], y + dy[[last, j]]);
            let r = px.hypot(py);
            dx[[last, j]] = px / r - x;
            dy[[last, j]] = py / r - y;
        }
        self.displacement = VectorField {
            x: ScalarField::from_values_unchecked(g.clone(), dx),
            y: ScalarField::from_values_unchecked(g, dy),
        };
    }

    /// Solves `x + d(x) = y` for each target by Newton's method, starting
    /// from `y - d(y)`.
    pub fn invert_points(&self, targets: &[[f64; 2]]) -> Result<Vec<[f64; 2]>> {
        let j = jacobian(&self.displacement);
        let it = Interpolant::new(&[
            &self.displacement.x,
            &self.displacement.y,
            &j.xx,
            &j.xy,
            &j.yx,
            &j.yy,
        ]);
        let mut buf = [0.0; 6];
        targets
            .iter()
            .map(|y| {
                it.eval_unchecked(*y, &mut buf);
                let mut x = [y[0] - buf[0], y[1] - buf[1]];
                let scale = 1.0f64.max(y[0].abs()).max(y[1].abs());
                for _ in 0..NEWTON_MAX {
                    it.eval_unchecked(x, &mut buf);
                    let rx = x[0] + buf[0] - y[0];
                    let ry = x[1] + buf[1] - y[1];
                    let (a, b, c, d) = (1.0 + buf[2], buf[3], buf[4], 1.0 + buf[5]);
                    let det = a * d - b * c;
                    if det.abs() < 1e-12 || !det.is_finite() {
                        break;
                    }
                    let sx = (d * rx - b * ry) / det;
                    let sy = (-c * rx + a * ry) / det;
                    x[0] -= sx;
                    x[1] -= sy;
                    if sx.hypot(sy) <= 4.0 * f64::EPSILON * scale {
                        return Ok(x);
                    }
                    if rx.hypot(ry) <= 1e-15 * scale {
                        return Ok(x);
                    }
                }
                it.eval_unchecked(x, &mut buf);
                let res = (x[0] + buf[0] - y[0]).hypot(x[1] + buf[1] - y[1]);
                if res <= 1e-12 * scale {
                    Ok(x)
                } else {
                    Err(Error::InversionFailure { x: y[0], y: y[1] })
                }
            })
            .collect()
    }

    /// The inverse map sampled at the nodes.
    pub fn inverse(&self) -> Result<DiskMap> {
        let g = self.grid();
        let pts = self.invert_points(&g.nodes())?;
        let mut inv = DiskMap::from_points(g, &pts, self.kind);
        if self.kind == MapKind::Diffeomorphism {
            inv.renormalize_boundary();
        }
        Ok(inv)
    }

    /// Inverse sampled at the nodes without snapping the boundary ring back
    /// to the circle; for maps that are only approximately onto the disk.
    pub fn inverse_unprojected(&self) -> Result<DiskMap> {
        let g = self.grid();
        let pts = self.invert_points(&g.nodes())?;
        Ok(DiskMap::from_points(g, &pts, MapKind::Embedding))
    }

    /// `self o other`.
    pub fn after(&self, other: &DiskMap) -> Result<DiskMap> {
        let g = self.grid();
        let it = Interpolant::new(&[&self.displacement.x, &self.displacement.y]);
        let slack = crate::tolerances::Tolerances::default().tol_bdry;
        let mut buf = [0.0; 2];
        let pts = other
            .points()
            .iter()
            .map(|p| {
                it.eval_with_slack(*p, slack, &mut buf)?;
                Ok([p[0] + buf[0], p[1] + buf[1]])
            })
            .collect::<Result<Vec<_>>>()?;
        let kind = if self.kind == MapKind::Diffeomorphism && other.kind == MapKind::Diffeomorphism {
            MapKind::Diffeomorphism
        } else {
            MapKind::Embedding
        };
        Ok(DiskMap::from_points(g, &pts, kind))
    }
}

/// `det(I + D d)` at every node.
pub fn jacobian_det(g: &DiskMap) -> ScalarField {
    g.jacobian().determinant()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disk_field::interp::compose;

    fn grid() -> Arc<DiskGrid> {
        DiskGrid::new(16, 12).unwrap()
    }

    fn swirl(g: &Arc<DiskGrid>, eps: f64) -> DiskMap {
        // rotation by an angle depending on radius: area preserving, boundary fixed
        let pts: Vec<[f64; 2]> = g
            .nodes()
            .iter()
            .map(|p| {
                let r2 = p[0] * p[0] + p[1] * p[1];
                let a = eps * (1.0 - r2) * (1.0 - r2);
                let (s, c) = a.sin_cos();
                [c * p[0] - s * p[1], s * p[0] + c * p[1]]
            })
            .collect();
        DiskMap::from_points(g, &pts, MapKind::Diffeomorphism)
    }

    #[test]
    fn identity_and_rotation_have_unit_jacobian() {
        let g = grid();
        assert!(jacobian_det(&DiskMap::identity(&g)).map(|v| v - 1.0).max_abs() < 1e-12);
        assert!(jacobian_det(&DiskMap::rotation(&g, 0.8)).map(|v| v - 1.0).max_abs() < 1e-12);
        DiskMap::rotation(&g, 0.8).validate(1e-9).unwrap();
    }

    #[test]
    fn swirl_is_volume_preserving() {
        let g = DiskGrid::new(32, 20).unwrap();
        let m = swirl(&g, 0.2);
        assert!(jacobian_det(&m).map(|v| v - 1.0).max_abs() < 1e-8);
        m.validate(1e-12).unwrap();
    }

    #[test]
    fn compose_with_inverse_roundtrip() {
        let g = DiskGrid::new(32, 20).unwrap();
        let m = swirl(&g, 0.2);
        let inv = m.inverse().unwrap();
        let f = ScalarField::from_fn(&g, |x, y| x * x - 0.5 * y + x * y * y);
        let back = compose(&compose(&f, &m).unwrap(), &inv).unwrap();
        assert!((&back - &f).max_abs() < 1e-6);
        let id = m.after(&inv).unwrap();
        assert!(id.displacement().max_abs() < 1e-7);
    }

    #[test]
    fn rotation_inverse() {
        let g = grid();
        let inv = DiskMap::rotation(&g, 0.3).inverse().unwrap();
        let exact = DiskMap::rotation(&g, -0.3);
        assert!((inv.displacement() - exact.displacement()).max_abs() < 1e-12);
    }
}
