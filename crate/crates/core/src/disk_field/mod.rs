//! Fields, maps and their calculus on the closed unit disk.

pub mod calculus;
pub mod elliptic;
pub mod field;
pub mod grid;
pub mod interp;
pub mod map;
pub mod norms;

pub use calculus::{
    curl, directional_derivative, divergence, gradient, hessian, jacobian, laplacian,
    rotated_gradient, second_covariant_gradient, third_derivatives, Hessian, Jacobian,
};
pub use elliptic::{harmonic_extension, solve_dirichlet, solve_neumann, solve_neumann_with};
pub use field::{BoundaryFunction, ScalarField, VectorField};
pub use grid::DiskGrid;
pub use interp::{compose, compose_vector, evaluate_at, Interpolant};
pub use map::{jacobian_det, DiskMap, MapKind};
pub use norms::{restrict_boundary, sobolev_norm_boundary, sobolev_norm_disk, sobolev_norm_vector};
