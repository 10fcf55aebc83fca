//! Numerical laboratory for comparison geometry on warped-product model
//! spaces: intrinsic model quantities, ambient charts with covariant
//! differentiation, parametric immersions sampled as simplicial meshes,
//! extrinsic-ball measurement, end counting, and pass/fail verdicts for
//! growth-vs-ends inequalities.

pub mod ambient;
pub mod config;
pub mod error;
pub mod expr;
pub mod immersion;
pub mod mesh;
pub mod model;
pub mod pipeline;
pub mod quadrature;
pub mod topology;
pub mod verifier;

pub use error::{Error, Result};
