//! Pareto set models mapping preferences to decisions, and their training.

mod model;
mod trainer;

pub use model::{
    decision_head, predict, vanilla_parameter_count, vanilla_width_for, Forward, GaussianPslModel,
    ParetoSetModel, VanillaPslModel, AGGREGATOR_HIDDEN, LATENT_WIDTH, SUBSPACE_HIDDEN,
};
pub use trainer::{
    build_model, scalarized_loss, train, Evaluation, LhdPoint, RunRecord, TrainConfig, Trainer,
};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diffcore::DiffError;
use crate::gaussian_partition::PartitionError;
use crate::metrics::MetricsError;
use crate::problems::ProblemError;
use crate::scalarize::ScalarizeError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("non-finite loss at iteration {iteration}")]
    NonFiniteLoss { iteration: usize },
    #[error("training aborted at iteration {iteration}: {source}")]
    Aborted {
        iteration: usize,
        #[source]
        source: DiffError,
    },
    #[error(transparent)]
    Diff(#[from] DiffError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Scalarize(#[from] ScalarizeError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Gaussian,
    Vanilla3,
    Vanilla4,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Gaussian, ModelKind::Vanilla3, ModelKind::Vanilla4];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Gaussian => "gaussian",
            ModelKind::Vanilla3 => "vanilla3",
            ModelKind::Vanilla4 => "vanilla4",
        }
    }

    /// Number of dense layers of a vanilla model.
    pub fn depth(self) -> Option<usize> {
        match self {
            ModelKind::Gaussian => None,
            ModelKind::Vanilla3 => Some(3),
            ModelKind::Vanilla4 => Some(4),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| ModelError::InvalidConfig(format!("unknown model kind `{s}`")))
    }
}
