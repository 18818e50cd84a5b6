//! Poincaré-series machinery for the quadratic family `f_c(x) = c - x^2` near the
//! Chebyshev map.
//!
//! The crate is organised in layers:
//!
//! * [`dynamics`]: the map, derivative cocycles, inverse branches and regions.
//! * [`renorm`]: superattracting parameters, scaling factors, the functional
//!   equation solver and nested domain systems.
//! * [`series`]: orbit families, backward-tree enumeration, sups over regions,
//!   expansion profiles and the pressure estimator.
//! * [`certificates`]: the quadratic recursive estimate and the area induction.
//! * [`oracles`]: independent escape-time, box-counting, cascade and Monte Carlo checks.
//! * [`config`] and [`report`]: run configuration and artifact output.

// `!(x < y)` is used on purpose so that NaN inputs fail validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certificates;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod oracles;
pub mod renorm;
pub mod report;
pub mod series;

pub use error::{Error, Result};

pub use num_complex::Complex64;

/// Version string embedded in reports and manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
