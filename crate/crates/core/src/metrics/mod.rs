//! Pareto dominance, hypervolume and the log hypervolume difference.

mod dominance;
mod hypervolume;

pub use dominance::{dominates, filter_nondominated};
pub use hypervolume::{
    clip_to_reference, hv_monte_carlo, hypervolume, lhd, lhd_with_reference_hv, HvConfig, Lhd,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("hypervolume supports 2 or 3 objectives, got {0}")]
    Unsupported(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
