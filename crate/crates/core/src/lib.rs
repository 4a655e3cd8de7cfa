//! Computational toolkit for low-dimensional uniform rectifiability in the
//! Heisenberg group: group geometry, the Juillet curve, flatness
//! coefficients on dyadic cubes and balls, Carleson sums, and corona
//! decompositions by horizontal planes.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod carleson;
pub mod cloud;
pub mod coeff;
pub mod corona;
pub mod curve;
pub mod error;
pub mod exec;
pub mod hgroup;

pub use error::{Error, Result};
pub use exec::Exec;

/// Version of this library.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
