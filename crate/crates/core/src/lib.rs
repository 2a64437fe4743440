//! Fractional mean curvature of rotationally symmetric hypersurfaces in
//! R^{n+1}, together with the checks built on it: an explicit barrier family
//! with positive curvature, the cone constant, a sliding argument for
//! catenoid-type sets and blow-down flatness for graph-type sets.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod kernel;
pub mod barrier;
pub mod sliding;
pub mod blowdown;

pub use error::{Error, Result};
