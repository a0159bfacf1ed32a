/// Named numerical tolerances shared by the solvers.
///
/// Every threshold that gates convergence or an admissibility check lives
/// here so experiments can tighten or relax them from configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Residual of the per-mode elliptic solves (max norm, relative to the data scale).
    pub tol_ell: f64,
    /// Allowed Neumann compatibility discrepancy before projection.
    pub tol_compat: f64,
    /// Residual of `lap f + det D^2 f = 0`.
    pub tol_vol: f64,
    /// Residual of the `L1` inversion.
    pub tol_l1: f64,
    /// Boundary tolerance `| |map| - 1 |` for diffeomorphisms of the disk.
    pub tol_bdry: f64,
    /// Reproduction error of the embedding factorization.
    pub tol_fact: f64,
    /// Radius of the admissible ball of boundary data in the boundary `H^{5/2}` norm.
    pub delta0: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tol_ell: 1e-9,
            tol_compat: 1e-8,
            tol_vol: 1e-9,
            tol_l1: 1e-9,
            tol_bdry: 1e-9,
            tol_fact: 1e-7,
            delta0: 0.1,
        }
    }
}
