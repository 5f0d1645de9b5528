//! Boundary-integral tools for the small-penetration-depth limit of London
//! superconductors.
//!
//! The crate computes the limiting magnetostatic fields outside (and, for
//! thin shells, inside the hole of) a type-I superconductor with prescribed
//! cycle circulations, builds the explicit boundary-layer 2-form whose
//! coderivative approximates the superconducting current, and checks the
//! associated identities, spectral bounds and convergence rates.
//!
//! Units are chosen with `mu_0 = 1`.

pub mod boundary_layer;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod layer_potentials;
pub mod limit_solver;
pub mod linalg;
pub mod model_problems;
pub mod quadrature;
pub mod spectral_checks;
pub mod vec3;

pub use error::{Error, Result};
pub use vec3::Vec3;
