use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::model::{predict, vanilla_width_for, GaussianPslModel, ParetoSetModel, VanillaPslModel};
use super::{ModelError, ModelKind};
use crate::diffcore::{adam_step, DiffError, OptimState, Tape, Var};
use crate::gaussian_partition::{AdcConfig, CensusRecord};
use crate::metrics::{hypervolume, lhd_with_reference_hv, HvConfig, Lhd};
use crate::problems::{ideal_and_nadir, ProblemId, ProblemSpec, ReferenceFront};
use crate::scalarize::{evaluation_grid, sample_preferences, IdealSource, ScalarizerConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub kind: ModelKind,
    pub iterations: usize,
    pub batch_size: usize,
    /// Entropy coefficient `γ`.
    pub gamma: f64,
    pub learning_rate: f64,
    pub seed: u64,
    /// LHD is recorded after every `lhd_every` iterations.
    pub lhd_every: usize,
    pub scalarizer: ScalarizerConfig,
    pub adc: AdcConfig,
    /// Parameter count the vanilla hidden width is matched to. When unset,
    /// the initial Gaussian model's count is used.
    pub param_target: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            kind: ModelKind::Gaussian,
            iterations: 3000,
            batch_size: 32,
            gamma: 0.1,
            learning_rate: 1e-3,
            seed: 0,
            lhd_every: 50,
            scalarizer: ScalarizerConfig::default(),
            adc: AdcConfig::default(),
            param_target: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.iterations < 1 || self.batch_size < 1 || self.lhd_every < 1 {
            return Err(ModelError::InvalidConfig(
                "iterations, batch size and LHD interval must be at least 1".into(),
            ));
        }
        if !(self.gamma >= 0.0) || !(self.learning_rate >= 0.0) {
            return Err(ModelError::InvalidConfig(format!(
                "gamma {} and learning rate {} must be non-negative",
                self.gamma, self.learning_rate
            )));
        }
        self.scalarizer.validate()?;
        self.adc.validate()?;
        Ok(())
    }
}

/// Independent random stream `stream` of run seed `seed`.
fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

const INIT_STREAM: u64 = 0;
const PREF_STREAM: u64 = 1;
const ADC_STREAM: u64 = 2;

/// Builds the model described by `config`, initialized from the run's
/// initialization stream.
pub fn build_model(
    problem: &ProblemSpec,
    config: &TrainConfig,
) -> Result<Box<dyn ParetoSetModel>, ModelError> {
    let mut rng = stream(config.seed, INIT_STREAM);
    match config.kind.depth() {
        None => Ok(Box::new(GaussianPslModel::new(
            problem,
            config.adc.clone(),
            &mut rng,
        )?)),
        Some(depth) => {
            let target = match config.param_target {
                Some(t) => t,
                None => {
                    GaussianPslModel::new(problem, config.adc.clone(), &mut rng.clone())?.parameter_count()
                }
            };
            let (width, _) = vanilla_width_for(depth, problem.k, problem.n, target)?;
            Ok(Box::new(VanillaPslModel::new(problem, depth, width, &mut rng)?))
        }
    }
}

/// Owns one training run.
pub struct Trainer {
    problem: ProblemSpec,
    config: TrainConfig,
    model: Box<dyn ParetoSetModel>,
    optim: OptimState,
    running_min: Option<Vec<f64>>,
    fixed_ideal: Option<Vec<f64>>,
    pref_rng: ChaCha8Rng,
    adc_rng: ChaCha8Rng,
    iteration: usize,
    loss_curve: Vec<f64>,
    census: Vec<CensusRecord>,
}

impl Trainer {
    pub fn new(problem: &ProblemSpec, config: TrainConfig) -> Result<Self, ModelError> {
        config.validate()?;
        let model = build_model(problem, &config)?;
        Self::with_model(problem, config, model)
    }

    pub fn with_model(
        problem: &ProblemSpec,
        config: TrainConfig,
        model: Box<dyn ParetoSetModel>,
    ) -> Result<Self, ModelError> {
        config.validate()?;
        Ok(Self {
            problem: problem.clone(),
            optim: OptimState::new(config.learning_rate),
            running_min: None,
            fixed_ideal: None,
            pref_rng: stream(config.seed, PREF_STREAM),
            adc_rng: stream(config.seed, ADC_STREAM),
            iteration: 0,
            loss_curve: Vec::with_capacity(config.iterations),
            census: Vec::new(),
            model,
            config,
        })
    }

    /// Ideal point used when the scalarizer is configured with a fixed one.
    pub fn set_fixed_ideal(&mut self, ideal: Vec<f64>) {
        self.fixed_ideal = Some(ideal);
    }

    pub fn model(&self) -> &dyn ParetoSetModel {
        self.model.as_ref()
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn loss_curve(&self) -> &[f64] {
        &self.loss_curve
    }

    pub fn census(&self) -> &[CensusRecord] {
        &self.census
    }

    /// Ideal point `z*` the scalarizer currently uses, margin included.
    pub fn ideal(&self) -> Option<Vec<f64>> {
        let base = match self.config.scalarizer.ideal {
            IdealSource::Fixed => self.fixed_ideal.as_ref(),
            IdealSource::RunningMin => self.running_min.as_ref(),
        }?;
        let m = self.config.scalarizer.ideal_margin;
        Some(base.iter().map(|z| z - m).collect())
    }

    /// One step on a freshly sampled preference batch.
    pub fn step(&mut self) -> Result<f64, ModelError> {
        let prefs: Vec<Vec<f64>> =
            sample_preferences(self.problem.k, self.config.batch_size, &mut self.pref_rng)?
                .into_iter()
                .map(|p| p.into_inner())
                .collect();
        self.step_with(&prefs)
    }

    /// One step on the given preference batch: loss, backward pass,
    /// optimizer update and scheduled densification.
    pub fn step_with(&mut self, prefs: &[Vec<f64>]) -> Result<f64, ModelError> {
        if prefs.is_empty() {
            return Err(ModelError::InvalidConfig("empty preference batch".into()));
        }
        let iteration = self.iteration + 1;
        let abort = |source: DiffError| ModelError::Aborted { iteration, source };
        let tape = Tape::new();
        let forwards = self.model.forward_batch(&tape, prefs)?;
        let objectives: Vec<_> = forwards
            .iter()
            .map(|f| self.problem.evaluate_generic(&f.x.components()))
            .collect();

        let min = self
            .running_min
            .get_or_insert_with(|| vec![f64::INFINITY; self.problem.k]);
        for y in &objectives {
            for (m, v) in min.iter_mut().zip(y) {
                *m = m.min(v.scalar());
            }
        }
        let ideal = self.ideal().ok_or_else(|| {
            ModelError::InvalidConfig("fixed ideal point requested but not provided".into())
        })?;

        let entropies: Vec<_> = forwards.iter().map(|f| f.entropy).collect();
        let loss = scalarized_loss(
            &objectives,
            &entropies,
            prefs,
            &self.config.scalarizer,
            &ideal,
            self.config.gamma,
        )?;
        let value = loss.scalar();
        if !value.is_finite() {
            return Err(ModelError::NonFiniteLoss { iteration });
        }
        let grads = tape.backward(loss)?;
        let store = self.model.store_mut();
        store.zero_grads();
        grads.accumulate_into(store)?;
        self.model.observe_gradients()?;
        adam_step(self.model.store_mut(), &mut self.optim).map_err(abort)?;
        if let Some((name, _)) = self
            .model
            .store()
            .iter()
            .find(|(_, p)| p.value.iter().any(|v| !v.is_finite()))
        {
            return Err(abort(DiffError::NonFinite {
                parameter: name.to_string(),
                what: "value",
            }));
        }
        if let Some(c) = self.model.after_step(iteration, &mut self.adc_rng)? {
            self.census.push(c);
        }
        self.iteration = iteration;
        self.loss_curve.push(value);
        Ok(value)
    }
}

/// `mean_b [ s(y_b, λ_b, z) + γ · H_b ]`; the entropy term is left out when
/// `γ = 0` or a model has no partition.
pub fn scalarized_loss<'t>(
    objectives: &[Vec<Var<'t>>],
    entropies: &[Option<Var<'t>>],
    prefs: &[Vec<f64>],
    scalarizer: &ScalarizerConfig,
    ideal: &[f64],
    gamma: f64,
) -> Result<Var<'t>, ModelError> {
    if objectives.len() != prefs.len() || entropies.len() != prefs.len() || prefs.is_empty() {
        return Err(ModelError::InvalidConfig(format!(
            "loss over {} objective vectors, {} entropies and {} preferences",
            objectives.len(),
            entropies.len(),
            prefs.len()
        )));
    }
    let terms: Vec<Var<'t>> = objectives
        .iter()
        .zip(entropies)
        .zip(prefs)
        .map(|((y, h), pref)| {
            let s = scalarizer.apply(y, pref, ideal);
            match h {
                Some(h) if gamma > 0.0 => s + *h * gamma,
                _ => s,
            }
        })
        .collect();
    let tape = terms[0].tape();
    Ok(tape.add_n(&terms)? * (1.0 / prefs.len() as f64))
}

/// Fixed evaluation protocol for one problem: preference grid, reference
/// front, hypervolume reference point and `HV(Y*)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub grid: Vec<Vec<f64>>,
    pub reference_front: Vec<Vec<f64>>,
    pub ideal: Vec<f64>,
    pub nadir: Vec<f64>,
    pub hv: HvConfig,
    pub hv_star: f64,
}

impl Evaluation {
    /// Reference point `nadir + margin · (nadir − ideal)` of the front.
    pub fn new(problem: &ProblemSpec, front: &ReferenceFront, margin: f64) -> Result<Self, ModelError> {
        let (ideal, nadir) = ideal_and_nadir(&front.points)?;
        let hv = HvConfig::with_margin(&ideal, &nadir, margin);
        let hv_star = hypervolume(&front.points, &hv.reference)?;
        Ok(Self {
            grid: evaluation_grid(problem.k),
            reference_front: front.points.clone(),
            ideal,
            nadir,
            hv,
            hv_star,
        })
    }

    /// Objective vectors of the model's decisions over the grid.
    pub fn front(
        &self,
        problem: &ProblemSpec,
        model: &dyn ParetoSetModel,
    ) -> Result<Vec<Vec<f64>>, ModelError> {
        Ok(predict(model, &self.grid)?
            .iter()
            .map(|x| problem.evaluate_generic(x))
            .collect())
    }

    pub fn lhd(&self, front: &[Vec<f64>]) -> Result<Lhd, ModelError> {
        Ok(lhd_with_reference_hv(front, self.hv_star, &self.hv)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LhdPoint {
    pub iteration: usize,
    pub lhd: f64,
}

/// Everything recorded about one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub problem: ProblemId,
    pub config: TrainConfig,
    /// Loss after each iteration; entry `i` belongs to iteration `i + 1`.
    pub loss_curve: Vec<f64>,
    pub lhd_curve: Vec<LhdPoint>,
    pub initial_lhd: f64,
    pub final_lhd: f64,
    /// Some LHD evaluation hit the log guard.
    pub guard_tripped: bool,
    pub final_front: Vec<Vec<f64>>,
    pub census: Vec<CensusRecord>,
    pub parameter_count: usize,
    pub subspace_count: usize,
    pub reference_point: Vec<f64>,
    pub hv_star: f64,
}

impl RunRecord {
    pub fn seed(&self) -> u64 {
        self.config.seed
    }
}

/// Trains one model for `config.iterations` steps and evaluates it.
pub fn train(
    problem: &ProblemSpec,
    config: &TrainConfig,
    eval: &Evaluation,
) -> Result<RunRecord, ModelError> {
    let mut trainer = Trainer::new(problem, config.clone())?;
    if config.scalarizer.ideal == IdealSource::Fixed {
        trainer.set_fixed_ideal(eval.ideal.clone());
    }
    let initial = eval.lhd(&eval.front(problem, trainer.model())?)?;
    let mut guard_tripped = initial.guard_tripped;
    let mut lhd_curve = Vec::with_capacity(config.iterations / config.lhd_every);
    let mut last = None;
    for it in 1..=config.iterations {
        trainer.step()?;
        if it % config.lhd_every == 0 {
            let front = eval.front(problem, trainer.model())?;
            let l = eval.lhd(&front)?;
            guard_tripped |= l.guard_tripped;
            lhd_curve.push(LhdPoint {
                iteration: it,
                lhd: l.value,
            });
            if it == config.iterations {
                last = Some((front, l));
            }
        }
    }
    let (final_front, final_lhd) = match last {
        Some(v) => v,
        None => {
            let front = eval.front(problem, trainer.model())?;
            let l = eval.lhd(&front)?;
            guard_tripped |= l.guard_tripped;
            (front, l)
        }
    };
    log::debug!(
        "{} {} seed {}: LHD {:.4} -> {:.4}",
        problem.id,
        config.kind,
        config.seed,
        initial.value,
        final_lhd.value
    );
    Ok(RunRecord {
        problem: problem.id,
        config: config.clone(),
        loss_curve: trainer.loss_curve().to_vec(),
        lhd_curve,
        initial_lhd: initial.value,
        final_lhd: final_lhd.value,
        guard_tripped,
        final_front,
        census: trainer.census().to_vec(),
        parameter_count: trainer.model().parameter_count(),
        subspace_count: trainer.model().subspace_count(),
        reference_point: eval.hv.reference.clone(),
        hv_star: eval.hv_star,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::ProblemId;

    fn short(kind: ModelKind) -> TrainConfig {
        TrainConfig {
            kind,
            iterations: 20,
            lhd_every: 10,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn frozen_parameters_repeat_loss() {
        let p = ProblemSpec::new(ProblemId::Zdt3);
        let cfg = TrainConfig {
            learning_rate: 0.0,
            ..short(ModelKind::Gaussian)
        };
        let mut t = Trainer::new(&p, cfg).unwrap();
        let prefs = vec![vec![0.2, 0.8], vec![0.6, 0.4]];
        let a = t.step_with(&prefs).unwrap();
        let b = t.step_with(&prefs).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn runs_are_deterministic() {
        let p = ProblemSpec::new(ProblemId::Re21);
        let front = crate::problems::ReferenceFront {
            points: vec![vec![0.0, 1.0], vec![0.5, 0.5], vec![1.0, 0.0]],
            provenance: crate::problems::FrontProvenance::Analytic,
            density: 3,
        };
        let eval = Evaluation::new(&p, &front, 0.1).unwrap();
        for kind in ModelKind::ALL {
            let a = train(&p, &short(kind), &eval).unwrap();
            let b = train(&p, &short(kind), &eval).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.loss_curve.len(), 20);
            assert_eq!(a.lhd_curve.len(), 2);
        }
    }

    #[test]
    fn fixed_ideal_must_be_supplied() {
        let p = ProblemSpec::new(ProblemId::Zdt3);
        let mut cfg = short(ModelKind::Vanilla3);
        cfg.scalarizer.ideal = IdealSource::Fixed;
        let mut t = Trainer::new(&p, cfg).unwrap();
        assert!(t.step().is_err());
        t.set_fixed_ideal(vec![0.0, -1.0]);
        assert!(t.step().is_ok());
    }
}
