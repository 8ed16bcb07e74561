use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::problems::ProblemId;
use crate::psl_model::{ModelKind, TrainConfig};
use crate::scalarize::Method;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AblationMode {
    None,
    Subspaces,
    Gamma,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AblationConfig {
    pub mode: AblationMode,
    /// Problem of the ablation; DTLZ7 for subspaces and RE37 for gamma when unset.
    pub problem: Option<ProblemId>,
    pub scalarizer: Method,
    /// Fixed subspace counts, densification off.
    pub counts: Vec<usize>,
    /// Adds an arm with densification on.
    pub include_adc: bool,
    pub gammas: Vec<f64>,
}

impl Default for AblationConfig {
    fn default() -> Self {
        Self {
            mode: AblationMode::None,
            problem: None,
            scalarizer: Method::Tch,
            counts: vec![1, 3, 5, 7, 9],
            include_adc: true,
            gammas: vec![0.01, 0.1, 1.0],
        }
    }
}

/// Full description of an experiment; every run is a pure function of it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problems: Vec<ProblemId>,
    pub scalarizers: Vec<Method>,
    pub models: Vec<ModelKind>,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
    /// Cache directory for reference fronts.
    pub front_dir: PathBuf,
    /// Reference-front density; per-problem default when unset.
    pub front_density: Option<usize>,
    /// Hypervolume reference point margin above the front's nadir.
    pub reference_margin: f64,
    pub train: TrainConfig,
    pub ablation: AblationConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            problems: ProblemId::ALL.to_vec(),
            scalarizers: Method::ALL.to_vec(),
            models: ModelKind::ALL.to_vec(),
            seeds: (0..=10).collect(),
            output_dir: PathBuf::from("results"),
            front_dir: PathBuf::from("fronts"),
            front_density: None,
            reference_margin: 0.1,
            train: TrainConfig::default(),
            ablation: AblationConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String, HarnessError> {
        toml::to_string(self).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.problems.is_empty() || self.scalarizers.is_empty() || self.models.is_empty() {
            return bad("problem, scalarizer and model lists must be non-empty".into());
        }
        if self.seeds.is_empty() {
            return bad("seed list must be non-empty".into());
        }
        if self.seeds.iter().collect::<BTreeSet<_>>().len() != self.seeds.len() {
            return bad(format!("seeds must be distinct: {:?}", self.seeds));
        }
        if !(self.reference_margin >= 0.0) {
            return bad("reference margin must be non-negative".into());
        }
        if self
            .ablation
            .counts
            .iter()
            .any(|&c| c == 0 || c > self.train.adc.max_count)
        {
            return bad(format!(
                "ablation counts must lie in 1..={}",
                self.train.adc.max_count
            ));
        }
        if self.ablation.gammas.iter().any(|g| !(*g >= 0.0)) {
            return bad("ablation gammas must be non-negative".into());
        }
        self.train.validate()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dotted_keys_parse() {
        let cfg = ExperimentConfig::from_toml(
            r#"
problems = ["zdt3"]
scalarizers = ["tch", "ls"]
models = ["gaussian", "vanilla3"]
seeds = [0, 1, 2]
train.iterations = 100
train.scalarizer.cosmos_penalty = 0.5
train.adc.max_count = 16
ablation.mode = "gamma"
"#,
        )
        .unwrap();
        assert_eq!(cfg.problems, vec![ProblemId::Zdt3]);
        assert_eq!(cfg.train.iterations, 100);
        assert_eq!(cfg.train.batch_size, 32);
        assert_eq!(cfg.train.scalarizer.cosmos_penalty, 0.5);
        assert_eq!(cfg.train.adc.max_count, 16);
        assert_eq!(cfg.ablation.mode, AblationMode::Gamma);
    }

    #[test]
    fn rejects_bad_lists() {
        assert!(ExperimentConfig::from_toml("seeds = [1, 1]").is_err());
        assert!(ExperimentConfig::from_toml("models = []").is_err());
        assert!(ExperimentConfig::from_toml("unknown_key = 3").is_err());
    }

    #[test]
    fn round_trips() {
        let cfg = ExperimentConfig::default();
        let back = ExperimentConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(cfg, back);
    }
}
