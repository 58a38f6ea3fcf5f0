//! Statistical simulator of SRAM read timing under near-threshold process
//! variation, built around a cross-sensing timing-speculation mechanism:
//! per-cell bitline discharge sampling, double sense-amplifier evaluation
//! with input swap, segment-level error detection with extended-cycle
//! correction, and cache-level throughput/energy analysis.

// `!(x > 0.0)` deliberately rejects NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod array;
pub mod cache;
pub mod error;
pub mod rng;
pub mod schemes;
pub mod senseamp;
pub mod stats;
pub mod timing;
pub mod variation;

pub use error::{Error, Result};
