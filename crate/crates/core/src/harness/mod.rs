//! Experiment runner: configuration, seed sweeps, summaries, ablations and
//! plot-ready output files.

mod ablation;
mod config;
mod emit;
mod suite;
pub mod verify;

pub use ablation::{
    run_ablation_gamma, run_ablation_subspaces, AblationArm, GammaAblation, SubspaceAblation,
};
pub use config::{AblationConfig, AblationMode, ExperimentConfig};
pub use emit::{emit_curves, emit_run, write_front_csv};
pub use suite::{
    load_evaluations, median, run_suite, sample_std, RunFailure, RunKey, SuiteResult, SummaryRow,
    SummaryTable,
};

use std::path::Path;

use thiserror::Error;

use crate::diffcore::DiffError;
use crate::gaussian_partition::PartitionError;
use crate::metrics::MetricsError;
use crate::problems::ProblemError;
use crate::psl_model::ModelError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Diff(#[from] DiffError),
}

impl HarnessError {
    pub(crate) fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        HarnessError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }
}
