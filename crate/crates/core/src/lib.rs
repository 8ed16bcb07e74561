//! Pareto set learning with a Gaussian partition of preference space.

// `!(x > 0.0)` style checks reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diffcore;
pub mod gaussian_partition;
pub mod harness;
pub mod metrics;
pub mod problems;
pub mod psl_model;
pub mod scalarize;
