//! Small reverse-mode differentiation engine, dense networks and the
//! adaptive-moment optimizer used for training.

mod adam;
mod fdcheck;
mod mlp;
mod params;
mod real;
pub(crate) mod tape;

pub use adam::{adam_step, OptimState};
pub use fdcheck::finite_diff_check;
pub use mlp::{BoundMlp, MlpSpec, OutputActivation};
pub use params::{Parameter, ParameterStore};
pub use real::{max_of, sum_of, Real};
pub use tape::{Gradients, NodeId, Tape, Var};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiffError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
    #[error("non-finite {what} in parameter `{parameter}`")]
    NonFinite { parameter: String, what: &'static str },
}
