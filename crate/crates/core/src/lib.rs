//! Spectral simulation of the two-dimensional free-boundary Euler equations
//! with surface tension on the unit disk.
//!
//! The free boundary is tracked through the factorization of the Lagrangian
//! map `eta = (id + grad f) o beta`, where `beta` rearranges the disk and the
//! potential `f` carries the boundary oscillation.

pub mod disk_field;
pub mod dynamics;
pub mod error;
pub mod projections;
pub mod quadrature;
pub mod shape;
pub mod tolerances;

pub use error::{Error, Result};
pub use tolerances::Tolerances;
