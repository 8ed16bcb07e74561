use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{ModelError, ModelKind};
use crate::diffcore::{MlpSpec, OutputActivation, ParameterStore, Tape, Var};
use crate::gaussian_partition::{AdcConfig, CensusRecord, GaussianSubspace, Partition};
use crate::problems::ProblemSpec;

pub const SUBSPACE_HIDDEN: usize = 32;
pub const LATENT_WIDTH: usize = 16;
pub const AGGREGATOR_HIDDEN: usize = 64;

const AGGREGATOR: &str = "agg";
const VANILLA: &str = "psl";

/// One recorded forward pass.
#[derive(Debug, Clone, Copy)]
pub struct Forward<'t> {
    pub x: Var<'t>,
    /// `H(W_λ)` for models with a partition.
    pub entropy: Option<Var<'t>>,
}

/// A trainable map from preference vectors to decision vectors.
pub trait ParetoSetModel: Send {
    fn kind(&self) -> ModelKind;

    fn store(&self) -> &ParameterStore;

    fn store_mut(&mut self) -> &mut ParameterStore;

    /// Records the forward pass of every preference in `prefs` on `tape`.
    fn forward_batch<'t>(&self, tape: &'t Tape, prefs: &[Vec<f64>]) -> Result<Vec<Forward<'t>>, ModelError>;

    /// Called once gradients are in the store, before the optimizer step.
    fn observe_gradients(&mut self) -> Result<(), ModelError> {
        Ok(())
    }

    /// Called after the optimizer step that completed `iteration`.
    fn after_step(
        &mut self,
        _iteration: usize,
        _rng: &mut ChaCha8Rng,
    ) -> Result<Option<CensusRecord>, ModelError> {
        Ok(None)
    }

    fn subspace_count(&self) -> usize {
        0
    }

    fn parameter_count(&self) -> usize {
        self.store().scalar_count()
    }
}

/// Maps a logistic output `s ∈ (0,1)ⁿ` to `lower + (upper − lower) ⊙ s`.
pub fn decision_head<'t>(s: Var<'t>, lower: &[f64], upper: &[f64]) -> Var<'t> {
    let tape = s.tape();
    let range: Vec<f64> = lower.iter().zip(upper).map(|(l, u)| u - l).collect();
    s * tape.constant(&range) + tape.constant(lower)
}

/// Plain decision vectors for `prefs`.
pub fn predict(model: &dyn ParetoSetModel, prefs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, ModelError> {
    let tape = Tape::new();
    Ok(model
        .forward_batch(&tape, prefs)?
        .into_iter()
        .map(|f| f.x.value())
        .collect())
}

fn check_prefs(prefs: &[Vec<f64>], k: usize) -> Result<(), ModelError> {
    if let Some(p) = prefs.iter().find(|p| p.len() != k) {
        return Err(ModelError::InvalidConfig(format!(
            "preference of length {} for {k} objectives",
            p.len()
        )));
    }
    Ok(())
}

/// Per-subspace lightweight networks over a Gaussian partition, combined by
/// weight and decoded by an aggregator network.
#[derive(Debug, Clone)]
pub struct GaussianPslModel {
    partition: Partition,
    sub_spec: MlpSpec,
    agg_spec: MlpSpec,
    store: ParameterStore,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl GaussianPslModel {
    pub fn new(problem: &ProblemSpec, adc: AdcConfig, rng: &mut ChaCha8Rng) -> Result<Self, ModelError> {
        let partition = Partition::initialize(problem.k, adc, rng)?;
        Self::from_partition(problem, partition, rng)
    }

    pub fn from_partition(
        problem: &ProblemSpec,
        partition: Partition,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self, ModelError> {
        let k = problem.k;
        if partition.dim() != k {
            return Err(ModelError::InvalidConfig(format!(
                "partition over {} dimensions for {k} objectives",
                partition.dim()
            )));
        }
        let sub_spec = MlpSpec::new(vec![k, SUBSPACE_HIDDEN, LATENT_WIDTH], OutputActivation::Identity)?;
        let agg_spec = MlpSpec::new(
            vec![LATENT_WIDTH + k, AGGREGATOR_HIDDEN, AGGREGATOR_HIDDEN, problem.n],
            OutputActivation::Logistic,
        )?;
        let mut store = ParameterStore::new();
        partition.write_params(&mut store)?;
        for id in partition.ids() {
            sub_spec.init_params(&mut store, &Self::subnet_prefix(id), rng)?;
        }
        agg_spec.init_params(&mut store, AGGREGATOR, rng)?;
        let (lower, upper) = problem.bounds();
        Ok(Self {
            partition,
            sub_spec,
            agg_spec,
            store,
            lower: lower.to_vec(),
            upper: upper.to_vec(),
        })
    }

    /// Parameter-name prefix of subspace `id`'s network.
    pub fn subnet_prefix(id: u64) -> String {
        format!("sub.{id:05}")
    }

    pub fn aggregator_prefix() -> &'static str {
        AGGREGATOR
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn subnet_spec(&self) -> &MlpSpec {
        &self.sub_spec
    }

    pub fn aggregator_spec(&self) -> &MlpSpec {
        &self.agg_spec
    }

    pub fn bounds(&self) -> (&[f64], &[f64]) {
        (&self.lower, &self.upper)
    }

    /// Records the forward pass with parameters taken from `store`, which
    /// must hold the same names as the model's own store.
    pub fn forward_with<'t>(
        &self,
        tape: &'t Tape,
        store: &ParameterStore,
        prefs: &[Vec<f64>],
    ) -> Result<Vec<Forward<'t>>, ModelError> {
        check_prefs(prefs, self.partition.dim())?;
        let partition = self.partition.bind(tape, store)?;
        let subnets = self
            .partition
            .ids()
            .into_iter()
            .map(|id| self.sub_spec.bind(tape, store, &Self::subnet_prefix(id)))
            .collect::<Result<Vec<_>, _>>()?;
        let agg = self.agg_spec.bind(tape, store, AGGREGATOR)?;
        prefs
            .iter()
            .map(|pref| {
                let p = tape.constant(pref);
                let (w, h) = partition.weights_and_entropy(p)?;
                let latents = subnets
                    .iter()
                    .map(|net| net.forward(p))
                    .collect::<Result<Vec<_>, _>>()?;
                let latent = tape.weighted_sum(w, &latents)?;
                let s = agg.forward(tape.concat(&[latent, p]))?;
                Ok(Forward {
                    x: decision_head(s, &self.lower, &self.upper),
                    entropy: Some(h),
                })
            })
            .collect()
    }

    /// Plain subspace weights at `pref`.
    pub fn weights(&self, pref: &[f64]) -> Result<Vec<f64>, ModelError> {
        Ok(self.partition.weights(pref)?)
    }
}

impl ParetoSetModel for GaussianPslModel {
    fn kind(&self) -> ModelKind {
        ModelKind::Gaussian
    }

    fn store(&self) -> &ParameterStore {
        &self.store
    }

    fn store_mut(&mut self) -> &mut ParameterStore {
        &mut self.store
    }

    fn forward_batch<'t>(&self, tape: &'t Tape, prefs: &[Vec<f64>]) -> Result<Vec<Forward<'t>>, ModelError> {
        self.forward_with(tape, &self.store, prefs)
    }

    fn observe_gradients(&mut self) -> Result<(), ModelError> {
        let norms = self.partition.center_grad_norms(&self.store)?;
        self.partition.accumulate_grad_stats(&norms);
        Ok(())
    }

    fn after_step(
        &mut self,
        iteration: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<Option<CensusRecord>, ModelError> {
        self.partition.read_params(&self.store)?;
        if !self.partition.config().is_scheduled(iteration) {
            return Ok(None);
        }
        let (outcome, census) = self.partition.adaptive_density_control(iteration, rng)?;
        for &(child, parent) in &outcome.added {
            let g = self
                .partition
                .get(child)
                .expect("densification reports live children");
            g.write_params(&mut self.store)?;
            self.store.copy_prefix(
                &format!("{}.", Self::subnet_prefix(parent)),
                &format!("{}.", Self::subnet_prefix(child)),
            );
        }
        for &id in &outcome.removed {
            self.store.remove_prefix(&GaussianSubspace::param_prefix(id));
            self.store.remove_prefix(&format!("{}.", Self::subnet_prefix(id)));
        }
        Ok(Some(census))
    }

    fn subspace_count(&self) -> usize {
        self.partition.len()
    }
}

/// Plain dense network from preference to decision.
#[derive(Debug, Clone)]
pub struct VanillaPslModel {
    spec: MlpSpec,
    store: ParameterStore,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

fn vanilla_widths(depth: usize, k: usize, n: usize, width: usize) -> Vec<usize> {
    let mut w = vec![k];
    w.extend(std::iter::repeat(width).take(depth - 1));
    w.push(n);
    w
}

/// Weights and biases of a `depth`-layer network `k → width → … → n`.
pub fn vanilla_parameter_count(depth: usize, k: usize, n: usize, width: usize) -> usize {
    vanilla_widths(depth, k, n, width)
        .windows(2)
        .map(|p| (p[0] + 1) * p[1])
        .sum()
}

/// Hidden width whose parameter count is closest to `target`, with that
/// count. Fails when no width lands within 5% of the target.
pub fn vanilla_width_for(
    depth: usize,
    k: usize,
    n: usize,
    target: usize,
) -> Result<(usize, usize), ModelError> {
    if depth < 2 {
        return Err(ModelError::InvalidConfig(format!("depth {depth} below 2")));
    }
    let count = |w| vanilla_parameter_count(depth, k, n, w);
    let (mut lo, mut hi) = (1usize, 1usize);
    while count(hi) < target {
        hi *= 2;
    }
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if count(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let best = [lo, hi]
        .into_iter()
        .min_by_key(|&w| count(w).abs_diff(target))
        .unwrap_or(hi);
    let c = count(best);
    if c.abs_diff(target) as f64 > 0.05 * target as f64 {
        return Err(ModelError::InvalidConfig(format!(
            "no depth-{depth} width reaches {target} parameters within 5% (closest {c})"
        )));
    }
    Ok((best, c))
}

impl VanillaPslModel {
    pub fn new<R: Rng + ?Sized>(
        problem: &ProblemSpec,
        depth: usize,
        width: usize,
        rng: &mut R,
    ) -> Result<Self, ModelError> {
        if depth < 2 {
            return Err(ModelError::InvalidConfig(format!("depth {depth} below 2")));
        }
        let spec = MlpSpec::new(
            vanilla_widths(depth, problem.k, problem.n, width),
            OutputActivation::Logistic,
        )?;
        let mut store = ParameterStore::new();
        spec.init_params(&mut store, VANILLA, rng)?;
        let (lower, upper) = problem.bounds();
        Ok(Self {
            spec,
            store,
            lower: lower.to_vec(),
            upper: upper.to_vec(),
        })
    }

    pub fn spec(&self) -> &MlpSpec {
        &self.spec
    }

    pub fn prefix() -> &'static str {
        VANILLA
    }

    pub fn depth(&self) -> usize {
        self.spec.layer_count()
    }
}

impl ParetoSetModel for VanillaPslModel {
    fn kind(&self) -> ModelKind {
        match self.depth() {
            3 => ModelKind::Vanilla3,
            _ => ModelKind::Vanilla4,
        }
    }

    fn store(&self) -> &ParameterStore {
        &self.store
    }

    fn store_mut(&mut self) -> &mut ParameterStore {
        &mut self.store
    }

    fn forward_batch<'t>(&self, tape: &'t Tape, prefs: &[Vec<f64>]) -> Result<Vec<Forward<'t>>, ModelError> {
        check_prefs(prefs, self.spec.input_width())?;
        let net = self.spec.bind(tape, &self.store, VANILLA)?;
        prefs
            .iter()
            .map(|pref| {
                let s = net.forward(tape.constant(pref))?;
                Ok(Forward {
                    x: decision_head(s, &self.lower, &self.upper),
                    entropy: None,
                })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::ProblemId;
    use rand::SeedableRng;

    #[test]
    fn width_search_hits_target() {
        for target in [2_000, 9_000, 30_000] {
            for depth in [3, 4] {
                let (w, c) = vanilla_width_for(depth, 2, 10, target).unwrap();
                assert!(c.abs_diff(target) as f64 <= 0.05 * target as f64);
                assert_eq!(c, vanilla_parameter_count(depth, 2, 10, w));
            }
        }
        assert_eq!(vanilla_parameter_count(3, 2, 3, 4), 3 * 4 + 5 * 4 + 5 * 3);
    }

    #[test]
    fn zero_model_maps_to_midpoint() {
        let p = ProblemSpec::new(ProblemId::Re21);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut m = VanillaPslModel::new(&p, 3, 8, &mut rng).unwrap();
        m.spec.clone().zero_params(m.store_mut(), VANILLA).unwrap();
        let x = predict(&m, &[vec![0.3, 0.7]]).unwrap();
        let (lo, hi) = p.bounds();
        for d in 0..p.n {
            assert!((x[0][d] - 0.5 * (lo[d] + hi[d])).abs() < 1e-12);
        }
    }

    #[test]
    fn gaussian_output_in_bounds() {
        let p = ProblemSpec::new(ProblemId::Dtlz7);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = GaussianPslModel::new(&p, AdcConfig::default(), &mut rng).unwrap();
        let prefs = crate::scalarize::evaluation_grid(3);
        for x in predict(&m, &prefs).unwrap() {
            p.check_decision(&x).unwrap();
        }
        assert_eq!(m.subspace_count(), 5);
    }
}
