use thiserror::Error;

/// Failures raised by the disk calculus, the elliptic solvers and the
/// time integrators.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("non-finite sample in {0}")]
    NonFinite(&'static str),
    #[error("collocation system for mode {mode} is singular")]
    SolverFailure { mode: usize },
    #[error("Neumann data incompatible: discrepancy {discrepancy:e} exceeds {tolerance:e}")]
    CompatibilityViolation { discrepancy: f64, tolerance: f64 },
    #[error("point ({x}, {y}) lies outside the closed unit disk")]
    PointOutsideDomain { x: f64, y: f64 },
    #[error("Sobolev order {0} is not supported (max 4)")]
    UnsupportedOrder(u32),
    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },
    #[error("pointwise inversion failed at ({x}, {y})")]
    InversionFailure { x: f64, y: f64 },
    #[error("boundary tangent degenerates: min |D_tau eta| = {min_speed}")]
    DegenerateTangent { min_speed: f64 },
    #[error("Taylor remainder leaves the perturbative regime (1 + t M = {value})")]
    RemainderBlowup { value: f64 },
    #[error("boundary data outside the admissible ball: norm {norm} >= {bound}")]
    OutsideAdmissibleBall { norm: f64, bound: f64 },
    #[error("map is not admissible: {0}")]
    InvalidMap(String),
    #[error("dt = {dt:e} exceeds the capillary limit {dt_max:e}")]
    CflViolation { dt: f64, dt_max: f64 },
    #[error("constraint re-projection failed: {0}")]
    ProjectionFailure(Box<Error>),
    #[error("factorization check failed: {0}")]
    FactorizationMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
