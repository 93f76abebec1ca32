//! Discrete domains, fields and the operators acting on them.

pub mod domain;
pub mod field;
mod highorder;
pub mod mesh;
pub mod norms;
pub mod ops;
pub mod spectral;

pub use domain::{DomainKind, DomainSpec, Potential, Quadratic, ScalarFn};
pub use field::{Field, MatrixField, ScalarField, VectorField};
pub use mesh::{Grid, MIN_RESOLUTION};
pub use norms::{inner, l2_norm, min_resolution_for_order, sobolev_norm};
