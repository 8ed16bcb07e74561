//! Gaussian subspaces over preference space: densities, normalized weights,
//! entropy and adaptive density control.

mod rotation;
mod subspace;

pub use rotation::{angle_count, axis_pairs, build_rotation, plane_rotation};
pub use subspace::{BoundSubspace, GaussianSubspace};

use std::collections::BTreeMap;

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diffcore::{DiffError, ParameterStore, Tape, Var};
use crate::scalarize::flat_dirichlet;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PartitionError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("internal error: {0}")]
    Internal(String),
}

/// Rule separating clone (small) from split (large) subspaces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "rule", content = "value")]
pub enum SplitThreshold {
    /// Median of the live subspaces' largest scales.
    MedianOfLive,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdcConfig {
    pub enabled: bool,
    pub interval: usize,
    pub start: usize,
    pub stop: usize,
    /// Trigger when a window-mean center gradient exceeds this multiple of the
    /// median across live subspaces.
    pub grad_factor: f64,
    /// Absolute trigger used with a single live subspace; also a lower bound
    /// on the relative threshold.
    pub grad_floor: f64,
    pub prune_opacity: f64,
    pub split_threshold: SplitThreshold,
    pub split_shrink: f64,
    pub max_count: usize,
    /// Clone offset magnitude as a fraction of the parent's mean scale.
    pub clone_offset: f64,
    pub initial_count: usize,
    pub initial_scale: f64,
    pub initial_opacity: f64,
}

impl Default for AdcConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            interval: 100,
            start: 300,
            stop: 2000,
            grad_factor: 2.0,
            grad_floor: 1e-4,
            prune_opacity: 0.01,
            split_threshold: SplitThreshold::MedianOfLive,
            split_shrink: 1.6,
            max_count: 32,
            clone_offset: 0.1,
            initial_count: 5,
            initial_scale: 0.3,
            initial_opacity: 0.9,
        }
    }
}

impl AdcConfig {
    pub fn validate(&self) -> Result<(), PartitionError> {
        let bad = |m: &str| Err(PartitionError::InvalidArgument(m.to_string()));
        if self.initial_count < 1 || self.initial_count > self.max_count {
            return bad("initial subspace count must be in 1..=max_count");
        }
        if self.interval == 0 {
            return bad("densification interval must be positive");
        }
        if !(self.split_shrink > 1.0) {
            return bad("split shrink factor must exceed 1");
        }
        if !(self.initial_scale > 0.0) || !(self.initial_opacity > 0.0 && self.initial_opacity < 1.0) {
            return bad("initial scale must be positive and opacity in (0,1)");
        }
        if !(self.grad_factor >= 0.0) || !(self.grad_floor >= 0.0) || !(self.clone_offset >= 0.0) {
            return bad("gradient factor, floor and clone offset must be non-negative");
        }
        if let SplitThreshold::Fixed(v) = self.split_threshold {
            if v.is_nan() {
                return bad("split threshold is NaN");
            }
        }
        Ok(())
    }

    /// Whether densification runs after completing step `iteration`.
    pub fn is_scheduled(&self, iteration: usize) -> bool {
        self.enabled && iteration >= self.start && iteration <= self.stop && iteration % self.interval == 0
    }
}

/// One densification event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusRecord {
    pub iteration: usize,
    pub pruned: usize,
    pub cloned: usize,
    pub split: usize,
    pub total: usize,
}

/// Structural changes made by one densification pass.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AdcOutcome {
    /// `(new id, parent id)`, in creation order.
    pub added: Vec<(u64, u64)>,
    pub removed: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GradStats {
    pub sum: f64,
    pub count: usize,
}

impl GradStats {
    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.sum / self.count as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    subspaces: Vec<GaussianSubspace>,
    config: AdcConfig,
    stats: BTreeMap<u64, GradStats>,
    next_id: u64,
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n == 0 {
        0.0
    } else if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

impl Partition {
    /// `config.initial_count` subspaces with Dirichlet(1) centers.
    pub fn initialize<R: Rng + ?Sized>(
        k: usize,
        config: AdcConfig,
        rng: &mut R,
    ) -> Result<Self, PartitionError> {
        config.validate()?;
        if k < 2 {
            return Err(PartitionError::InvalidArgument(format!(
                "preference dimension must be at least 2, got {k}"
            )));
        }
        let subspaces = (0..config.initial_count as u64)
            .map(|id| {
                let center = flat_dirichlet(k, rng);
                GaussianSubspace::new(id, 0, center, config.initial_scale, config.initial_opacity)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_subspaces(subspaces, config)
    }

    pub fn from_subspaces(
        subspaces: Vec<GaussianSubspace>,
        config: AdcConfig,
    ) -> Result<Self, PartitionError> {
        let Some(first) = subspaces.first() else {
            return Err(PartitionError::InvalidArgument(
                "partition needs a subspace".into(),
            ));
        };
        let k = first.dim();
        if subspaces.len() > config.max_count {
            return Err(PartitionError::InvalidArgument(format!(
                "{} subspaces exceed the maximum {}",
                subspaces.len(),
                config.max_count
            )));
        }
        let mut ids: Vec<u64> = subspaces.iter().map(|g| g.id).collect();
        ids.sort_unstable();
        ids.dedup();
        if ids.len() != subspaces.len() {
            return Err(PartitionError::InvalidArgument("duplicate subspace id".into()));
        }
        for g in &subspaces {
            if g.dim() != k || g.angles.len() != angle_count(k) || g.log_scales.len() != k {
                return Err(PartitionError::InvalidArgument(format!(
                    "subspace {} has inconsistent dimensions",
                    g.id
                )));
            }
        }
        let next_id = ids.last().map_or(0, |m| m + 1);
        Ok(Self {
            subspaces,
            config,
            stats: BTreeMap::new(),
            next_id,
        })
    }

    pub fn len(&self) -> usize {
        self.subspaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subspaces.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.subspaces[0].dim()
    }

    pub fn subspaces(&self) -> &[GaussianSubspace] {
        &self.subspaces
    }

    pub fn subspaces_mut(&mut self) -> &mut [GaussianSubspace] {
        &mut self.subspaces
    }

    pub fn config(&self) -> &AdcConfig {
        &self.config
    }

    pub fn ids(&self) -> Vec<u64> {
        self.subspaces.iter().map(|g| g.id).collect()
    }

    pub fn get(&self, id: u64) -> Option<&GaussianSubspace> {
        self.subspaces.iter().find(|g| g.id == id)
    }

    pub fn stats(&self, id: u64) -> GradStats {
        self.stats.get(&id).copied().unwrap_or_default()
    }

    /// Log-densities of every subspace at `p`, in partition order.
    pub fn log_densities(&self, p: &[f64]) -> Result<Vec<f64>, PartitionError> {
        self.subspaces.iter().map(|g| g.log_density(p)).collect()
    }

    /// Normalized subspace weights at `p`.
    ///
    /// Computed as a softmax of log-densities, which equals the normalized
    /// density ratio and stays defined when every density underflows.
    pub fn weights(&self, p: &[f64]) -> Result<Vec<f64>, PartitionError> {
        let logs = self.log_densities(p)?;
        let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
        let z: f64 = e.iter().sum();
        Ok(e.into_iter().map(|v| v / z).collect())
    }

    pub fn write_params(&self, store: &mut ParameterStore) -> Result<(), DiffError> {
        self.subspaces.iter().try_for_each(|g| g.write_params(store))
    }

    pub fn read_params(&mut self, store: &ParameterStore) -> Result<(), DiffError> {
        self.subspaces.iter_mut().try_for_each(|g| g.read_params(store))
    }

    pub fn bind<'t>(&self, tape: &'t Tape, store: &ParameterStore) -> Result<BoundPartition<'t>, DiffError> {
        Ok(BoundPartition {
            subspaces: self
                .subspaces
                .iter()
                .map(|g| g.bind(tape, store))
                .collect::<Result<_, _>>()?,
        })
    }

    /// Adds one step's center-gradient norms `‖∂L/∂μ_g‖₂`.
    pub fn accumulate_grad_stats(&mut self, norms: &[(u64, f64)]) {
        for &(id, n) in norms {
            let s = self.stats.entry(id).or_default();
            s.sum += n;
            s.count += 1;
        }
    }

    /// Reads `‖∂L/∂μ_g‖₂` for every live subspace from the store's gradients.
    pub fn center_grad_norms(&self, store: &ParameterStore) -> Result<Vec<(u64, f64)>, DiffError> {
        self.subspaces
            .iter()
            .map(|g| {
                let name = GaussianSubspace::center_param_name(g.id);
                let grad = store.grad(&name).ok_or(DiffError::UnknownParameter(name))?;
                Ok((g.id, grad.iter().map(|v| v * v).sum::<f64>().sqrt()))
            })
            .collect()
    }

    pub fn reset_stats(&mut self) {
        self.stats.clear();
    }

    fn fresh_id(&mut self) -> u64 {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    /// Prune, clone and split according to the configuration, then reset the
    /// gradient statistics.
    ///
    /// Pruning removes subspaces with `σ(α)` below the prune threshold but
    /// never the last one. Survivors whose window-mean center gradient
    /// exceeds the trigger are processed in decreasing gradient order: small
    /// ones are cloned with a small tangent offset, large ones are replaced
    /// by two children drawn from their own distribution with shrunken
    /// scales. Clone and split are skipped once the partition is full.
    pub fn adaptive_density_control<R: Rng + ?Sized>(
        &mut self,
        iteration: usize,
        rng: &mut R,
    ) -> Result<(AdcOutcome, CensusRecord), PartitionError> {
        let mut outcome = AdcOutcome::default();
        let mut census = CensusRecord {
            iteration,
            pruned: 0,
            cloned: 0,
            split: 0,
            total: 0,
        };

        let mut transparent: Vec<(f64, u64)> = self
            .subspaces
            .iter()
            .filter(|g| g.opacity() < self.config.prune_opacity)
            .map(|g| (g.opacity(), g.id))
            .collect();
        if transparent.len() == self.subspaces.len() {
            // Keep the most opaque one.
            transparent.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            transparent.pop();
        }
        for &(_, id) in &transparent {
            self.subspaces.retain(|g| g.id != id);
            outcome.removed.push(id);
            census.pruned += 1;
        }

        let means: Vec<(u64, f64)> = self
            .subspaces
            .iter()
            .map(|g| (g.id, self.stats(g.id).mean()))
            .collect();
        let threshold = if means.len() == 1 {
            self.config.grad_floor
        } else {
            let mut m: Vec<f64> = means.iter().map(|x| x.1).collect();
            (self.config.grad_factor * median(&mut m)).max(self.config.grad_floor)
        };
        let scale_threshold = match self.config.split_threshold {
            SplitThreshold::Fixed(v) => v,
            SplitThreshold::MedianOfLive => {
                let mut s: Vec<f64> = self.subspaces.iter().map(|g| g.max_scale()).collect();
                median(&mut s)
            }
        };
        let mut triggered: Vec<(u64, f64)> = means.into_iter().filter(|&(_, m)| m > threshold).collect();
        triggered.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

        for (id, _) in triggered {
            let Some(pos) = self.subspaces.iter().position(|g| g.id == id) else {
                continue;
            };
            let parent = self.subspaces[pos].clone();
            if parent.max_scale() <= scale_threshold {
                if self.subspaces.len() >= self.config.max_count {
                    continue;
                }
                let k = parent.dim();
                let mut dir: Vec<f64> = (0..k).map(|_| rng.sample(StandardNormal)).collect();
                let mean = dir.iter().sum::<f64>() / k as f64;
                dir.iter_mut().for_each(|d| *d -= mean);
                let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt();
                let step = self.config.clone_offset * parent.mean_scale();
                let mut child = parent.clone();
                child.id = self.fresh_id();
                child.birth = iteration;
                if norm > 0.0 {
                    for (c, d) in child.center.iter_mut().zip(&dir) {
                        *c += step * d / norm;
                    }
                }
                outcome.added.push((child.id, parent.id));
                self.subspaces.push(child);
                census.cloned += 1;
            } else {
                // Two children replace the parent: net growth of one.
                if self.subspaces.len() >= self.config.max_count {
                    continue;
                }
                let r = parent.rotation()?;
                let s = DVector::from_vec(parent.scales());
                let shrink = self.config.split_shrink.ln();
                let mut children = Vec::with_capacity(2);
                for _ in 0..2 {
                    let z = DVector::from_iterator(
                        parent.dim(),
                        (0..parent.dim()).map(|_| rng.sample::<f64, _>(StandardNormal)),
                    );
                    let offset = &r * s.component_mul(&z);
                    let mut child = parent.clone();
                    child.id = self.fresh_id();
                    child.birth = iteration;
                    for (c, o) in child.center.iter_mut().zip(offset.iter()) {
                        *c += o;
                    }
                    child.log_scales.iter_mut().for_each(|l| *l -= shrink);
                    outcome.added.push((child.id, parent.id));
                    children.push(child);
                }
                self.subspaces.remove(pos);
                self.subspaces.extend(children);
                outcome.removed.push(parent.id);
                census.split += 1;
            }
        }

        self.reset_stats();
        census.total = self.subspaces.len();
        Ok((outcome, census))
    }
}

/// Partition parameters bound on a tape.
#[derive(Debug, Clone)]
pub struct BoundPartition<'t> {
    subspaces: Vec<BoundSubspace<'t>>,
}

impl<'t> BoundPartition<'t> {
    /// Log-weights `ln W_λ` as a log-softmax of subspace log-densities.
    pub fn log_weights(&self, pref: Var<'t>) -> Result<Var<'t>, DiffError> {
        let logs = self
            .subspaces
            .iter()
            .map(|g| g.log_density(pref))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(pref.tape().concat(&logs).log_softmax())
    }

    /// `(W_λ, H(W_λ))`.
    pub fn weights_and_entropy(&self, pref: Var<'t>) -> Result<(Var<'t>, Var<'t>), DiffError> {
        let log_w = self.log_weights(pref)?;
        let w = log_w.exp();
        Ok((w, -(w * log_w).sum()))
    }
}

/// `−Σ w ln w`, with `0 · ln 0 = 0`.
pub fn entropy(w: &[f64]) -> f64 {
    -w.iter().filter(|&&v| v > 0.0).map(|&v| v * v.ln()).sum::<f64>()
}
