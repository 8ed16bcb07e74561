use std::path::Path;

use serde::{Deserialize, Serialize};

use super::emit::write_table;
use super::suite::{execute, load_evaluations, median, pool, sample_std, Job, RunKey};
use super::{ExperimentConfig, HarnessError};
use crate::problems::ProblemId;
use crate::psl_model::{ModelKind, RunRecord};

/// Runs of one ablation arm, in seed order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationArm {
    pub label: String,
    /// Fixed initial subspace count (densification off), or `None` for the
    /// densifying arm.
    pub count: Option<usize>,
    pub gamma: f64,
    pub records: Vec<RunRecord>,
    pub failures: Vec<(u64, String)>,
}

impl AblationArm {
    pub fn final_lhds(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.final_lhd).collect()
    }

    pub fn median_lhd(&self) -> f64 {
        median(&self.final_lhds())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubspaceAblation {
    pub problem: ProblemId,
    pub arms: Vec<AblationArm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaAblation {
    pub problem: ProblemId,
    pub arms: Vec<AblationArm>,
}

fn run_arms(
    cfg: &ExperimentConfig,
    problem: ProblemId,
    arms: Vec<(String, Option<usize>, crate::psl_model::TrainConfig)>,
    dir: &Path,
    jobs: usize,
) -> Result<Vec<AblationArm>, HarnessError> {
    let evals = load_evaluations(cfg, &[problem])?;
    let pool = pool(jobs)?;
    let mut queue = Vec::new();
    let mut owner = Vec::new();
    for (a, (label, _, train)) in arms.iter().enumerate() {
        for &seed in &cfg.seeds {
            let mut t = train.clone();
            t.seed = seed;
            owner.push(a);
            queue.push(Job {
                key: RunKey {
                    problem,
                    scalarizer: t.scalarizer.method,
                    model: ModelKind::Gaussian,
                    seed,
                },
                dir: dir.join(label).join(format!("seed{seed:02}")),
                config: t,
            });
        }
    }
    let results = execute(queue, &evals, cfg, &pool);
    let mut out: Vec<AblationArm> = arms
        .into_iter()
        .map(|(label, count, train)| AblationArm {
            label,
            count,
            gamma: train.gamma,
            records: Vec::new(),
            failures: Vec::new(),
        })
        .collect();
    for (a, (key, result)) in owner.into_iter().zip(results) {
        match result {
            Ok(r) => out[a].records.push(r),
            Err(e) => out[a].failures.push((key.seed, e)),
        }
    }
    Ok(out)
}

/// Fixed subspace counts with densification off, plus one densifying arm.
///
/// Writes `ablation_subspaces.csv` (`arm,count,seed,final_lhd,final_subspaces`)
/// and `ablation_subspaces_median.csv` (`arm,count,median_lhd,n_runs`).
pub fn run_ablation_subspaces(cfg: &ExperimentConfig, jobs: usize) -> Result<SubspaceAblation, HarnessError> {
    cfg.validate()?;
    let problem = cfg.ablation.problem.unwrap_or(ProblemId::Dtlz7);
    let mut base = cfg.train.clone();
    base.kind = ModelKind::Gaussian;
    base.scalarizer.method = cfg.ablation.scalarizer;
    let mut arms = Vec::new();
    for &c in &cfg.ablation.counts {
        let mut t = base.clone();
        t.adc.enabled = false;
        t.adc.initial_count = c;
        arms.push((format!("fixed{c}"), Some(c), t));
    }
    if cfg.ablation.include_adc {
        let mut t = base.clone();
        t.adc.enabled = true;
        arms.push(("adc".to_string(), None, t));
    }
    let dir = cfg.output_dir.join("ablation-subspaces");
    let arms = run_arms(cfg, problem, arms, &dir, jobs)?;

    let count = |a: &AblationArm| a.count.map_or_else(|| "adc".to_string(), |c| c.to_string());
    let mut rows = Vec::new();
    for a in &arms {
        for r in &a.records {
            rows.push(vec![
                a.label.clone(),
                count(a),
                r.seed().to_string(),
                format!("{:?}", r.final_lhd),
                r.subspace_count.to_string(),
            ]);
        }
    }
    write_table(
        &cfg.output_dir.join("ablation_subspaces.csv"),
        &["arm", "count", "seed", "final_lhd", "final_subspaces"],
        rows,
    )?;
    write_table(
        &cfg.output_dir.join("ablation_subspaces_median.csv"),
        &["arm", "count", "median_lhd", "n_runs"],
        arms.iter()
            .map(|a| {
                vec![
                    a.label.clone(),
                    count(a),
                    format!("{:?}", a.median_lhd()),
                    a.records.len().to_string(),
                ]
            })
            .collect(),
    )?;
    Ok(SubspaceAblation { problem, arms })
}

/// One arm per entry of the gamma grid.
///
/// Writes `ablation_gamma.csv` (`gamma,seed,final_lhd`) and
/// `ablation_gamma_summary.csv` (`gamma,median_lhd,std_lhd,n_runs`).
pub fn run_ablation_gamma(cfg: &ExperimentConfig, jobs: usize) -> Result<GammaAblation, HarnessError> {
    cfg.validate()?;
    let problem = cfg.ablation.problem.unwrap_or(ProblemId::Re37);
    let arms = cfg
        .ablation
        .gammas
        .iter()
        .map(|&g| {
            let mut t = cfg.train.clone();
            t.kind = ModelKind::Gaussian;
            t.scalarizer.method = cfg.ablation.scalarizer;
            t.gamma = g;
            (format!("gamma{g}"), None, t)
        })
        .collect();
    let dir = cfg.output_dir.join("ablation-gamma");
    let arms = run_arms(cfg, problem, arms, &dir, jobs)?;
    let mut rows = Vec::new();
    for a in &arms {
        for r in &a.records {
            rows.push(vec![
                a.gamma.to_string(),
                r.seed().to_string(),
                format!("{:?}", r.final_lhd),
            ]);
        }
    }
    write_table(
        &cfg.output_dir.join("ablation_gamma.csv"),
        &["gamma", "seed", "final_lhd"],
        rows,
    )?;
    write_table(
        &cfg.output_dir.join("ablation_gamma_summary.csv"),
        &["gamma", "median_lhd", "std_lhd", "n_runs"],
        arms.iter()
            .map(|a| {
                let l = a.final_lhds();
                vec![
                    a.gamma.to_string(),
                    format!("{:?}", median(&l)),
                    format!("{:?}", sample_std(&l)),
                    l.len().to_string(),
                ]
            })
            .collect(),
    )?;
    Ok(GammaAblation { problem, arms })
}
