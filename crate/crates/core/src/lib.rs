//! Calculus on parametrized evolving surfaces with boundary.
//!
//! Surfaces are given by closed-form flow maps `x̂(X, t)` over a parameter
//! rectangle. All surface operators are evaluated through the induced metric
//! on a structured parameter grid, so no ambient extension of a field is ever
//! built.

pub mod calculus;
pub mod constitutive;
pub mod error;
pub mod fields;
pub mod geometry;
pub mod grid;
pub mod identities;
pub mod linalg;
pub mod quadrature;
pub mod report;
pub mod scenario;
pub mod solver;
pub mod variational;

pub use error::{Error, Result};
