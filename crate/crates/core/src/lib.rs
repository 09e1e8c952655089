//! Boundary-integral solver for the Laplace equation in a 3D domain with a
//! small hole carrying a nonlinear Robin condition, with an eps-sweep harness.

pub mod cli;
pub mod error;
pub mod fields;
pub mod geometry;
pub mod oracle;
pub mod potential;
pub mod system;

pub use error::{Error, Result};
