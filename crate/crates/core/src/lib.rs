//! Driven, dissipative two-level systems in Bloch-vector form.

// `!(a < b)` is used on purpose so NaN lands on the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod export;
pub mod lz;
pub mod model;
pub mod spectral;

pub use error::{Error, Result};
