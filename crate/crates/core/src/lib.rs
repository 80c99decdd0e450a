//! Randomized E- and G-optimal experimental design.
//!
//! Relaxed designs are solved on the simplex, realized by i.i.d. sampling,
//! and compared against finite-sample matrix concentration bounds. A linear
//! bandit harness reuses the same designs for best-arm identification.

// `!(x > 0.0)` is used on purpose to reject NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bandit;
pub mod bounds;
pub mod design;
pub mod error;
pub mod exec;
pub mod harness;
mod linalg;
pub mod rng;
pub mod sampling;
pub mod spectral;

pub use error::{Error, Result};
pub use exec::Execution;
