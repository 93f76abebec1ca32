//! Regularised time-discrete solver for the semigeostrophic equations on
//! conformally flat two-dimensional domains.

pub mod error;
pub mod coeffs;
pub mod elliptic;
mod fastpoisson;
pub mod krylov;
pub mod grid;
pub mod hodge;
pub mod diagnostics;
pub mod stepper;
pub mod mollify;

pub use error::{Result, SgError};
