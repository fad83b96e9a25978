//! Selberg and Ruelle zeta functions over geodesic length spectra of rank-one
//! locally symmetric models, geodesic heat theta series, and zeta-regularized
//! and L² determinants.
//!
//! Modules:
//! - [`lie`]: structure constants and closed-form Lie formulas.
//! - [`spectrum`]: length spectra, validation, file format, synthesis.
//! - [`zeta`]: truncated Euler products, Ruelle factorization, checks.
//! - [`heat`]: theta series, spectral zeta, determinants and torsion.

pub mod error;
pub mod heat;
pub mod lie;
pub mod numerics;
pub mod spectrum;
pub mod zeta;

pub use error::{Error, ErrorKind, Result};
pub use num_complex::Complex64;

/// Version string recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
