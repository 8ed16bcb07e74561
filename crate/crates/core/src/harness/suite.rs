use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::emit::{emit_run, write_table};
use super::{ExperimentConfig, HarnessError};
use crate::problems::{ProblemId, ProblemSpec, ReferenceFront};
use crate::psl_model::{train, Evaluation, ModelKind, RunRecord, TrainConfig};
use crate::scalarize::Method;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RunKey {
    pub problem: ProblemId,
    pub scalarizer: Method,
    pub model: ModelKind,
    pub seed: u64,
}

impl RunKey {
    pub fn dir(&self, root: &Path) -> PathBuf {
        root.join("runs")
            .join(self.problem.name())
            .join(self.scalarizer.name())
            .join(self.model.name())
            .join(format!("seed{:02}", self.seed))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunFailure {
    pub key: RunKey,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub problem: ProblemId,
    pub model: ModelKind,
    pub scalarizer: Method,
    pub mean_lhd: f64,
    pub std_lhd: f64,
    pub n_runs: usize,
    pub flags: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SummaryTable {
    pub rows: Vec<SummaryRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub records: BTreeMap<RunKey, RunRecord>,
    pub failures: Vec<RunFailure>,
    pub summary: SummaryTable,
    /// Parameter count each vanilla width was matched to, per problem and scalarizer.
    pub param_targets: BTreeMap<(ProblemId, Method), usize>,
}

impl SuiteResult {
    /// Final LHD values of one cell, in seed order.
    pub fn final_lhds(&self, problem: ProblemId, scalarizer: Method, model: ModelKind) -> Vec<f64> {
        self.records
            .iter()
            .filter(|(k, _)| k.problem == problem && k.scalarizer == scalarizer && k.model == model)
            .map(|(_, r)| r.final_lhd)
            .collect()
    }
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (`n − 1` denominator); zero for one value.
pub fn sample_std(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (values.len() - 1) as f64).sqrt()
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[derive(Serialize)]
struct ReferenceInfo<'a> {
    problem: ProblemId,
    provenance: crate::problems::FrontProvenance,
    density: usize,
    points: usize,
    ideal: &'a [f64],
    nadir: &'a [f64],
    reference_point: &'a [f64],
    hv_star: f64,
}

/// Loads (or generates) every problem's reference front and derives its
/// evaluation protocol. Writes `reference/<problem>.json` under the output
/// directory.
pub fn load_evaluations(
    cfg: &ExperimentConfig,
    problems: &[ProblemId],
) -> Result<BTreeMap<ProblemId, (ProblemSpec, Evaluation)>, HarnessError> {
    let mut out = BTreeMap::new();
    for &id in problems {
        if out.contains_key(&id) {
            continue;
        }
        let spec = ProblemSpec::new(id);
        let density = cfg.front_density.unwrap_or_else(|| spec.default_front_density());
        let front = ReferenceFront::load_or_generate(&spec, density, &cfg.front_dir)?;
        let eval = Evaluation::new(&spec, &front, cfg.reference_margin)?;
        let path = cfg.output_dir.join("reference").join(format!("{id}.json"));
        let info = ReferenceInfo {
            problem: id,
            provenance: front.provenance,
            density,
            points: front.points.len(),
            ideal: &eval.ideal,
            nadir: &eval.nadir,
            reference_point: &eval.hv.reference,
            hv_star: eval.hv_star,
        };
        std::fs::create_dir_all(path.parent().expect("joined path"))
            .map_err(|e| HarnessError::io(&path, e))?;
        let json = serde_json::to_string_pretty(&info).map_err(|e| HarnessError::io(&path, e))?;
        std::fs::write(&path, json).map_err(|e| HarnessError::io(&path, e))?;
        out.insert(id, (spec, eval));
    }
    Ok(out)
}

pub(crate) fn pool(jobs: usize) -> Result<rayon::ThreadPool, HarnessError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| HarnessError::Config(e.to_string()))
}

pub(crate) struct Job {
    pub key: RunKey,
    pub config: TrainConfig,
    pub dir: PathBuf,
}

/// Runs jobs in parallel; each writes its own directory. Results keep the
/// order of `jobs`.
pub(crate) fn execute(
    jobs: Vec<Job>,
    evals: &BTreeMap<ProblemId, (ProblemSpec, Evaluation)>,
    experiment: &ExperimentConfig,
    pool: &rayon::ThreadPool,
) -> Vec<(RunKey, Result<RunRecord, String>)> {
    pool.install(|| {
        jobs.into_par_iter()
            .map(|job| {
                let (spec, eval) = &evals[&job.key.problem];
                let result = train(spec, &job.config, eval)
                    .map_err(|e| e.to_string())
                    .and_then(|r| {
                        emit_run(&r, experiment, &job.dir).map_err(|e| e.to_string())?;
                        Ok(r)
                    });
                match &result {
                    Ok(r) => log::info!(
                        "{} {} {} seed {}: final LHD {:.4}",
                        job.key.problem,
                        job.key.scalarizer,
                        job.key.model,
                        job.key.seed,
                        r.final_lhd
                    ),
                    Err(e) => log::warn!("{:?} failed: {e}", job.key),
                }
                (job.key, result)
            })
            .collect()
    })
}

fn train_config(cfg: &ExperimentConfig, key: &RunKey, target: Option<usize>) -> TrainConfig {
    let mut t = cfg.train.clone();
    t.kind = key.model;
    t.seed = key.seed;
    t.scalarizer.method = key.scalarizer;
    t.param_target = target;
    t
}

/// Runs the configured cross product of problems, scalarizers, model kinds
/// and seeds with `jobs` parallel workers.
///
/// Gaussian runs go first. The first seed's Gaussian run of each (problem,
/// scalarizer) fixes the parameter count the vanilla widths are matched to;
/// when Gaussian models are not part of the suite that run is still made as
/// a pilot but not reported.
pub fn run_suite(cfg: &ExperimentConfig, jobs: usize) -> Result<SuiteResult, HarnessError> {
    cfg.validate()?;
    let evals = load_evaluations(cfg, &cfg.problems)?;
    let pool = pool(jobs)?;
    let root = &cfg.output_dir;
    let with_gaussian = cfg.models.contains(&ModelKind::Gaussian);
    let pilot_seed = cfg.seeds[0];

    let mut first = Vec::new();
    for &problem in &cfg.problems {
        for &scalarizer in &cfg.scalarizers {
            let seeds: &[u64] = if with_gaussian {
                &cfg.seeds
            } else {
                &cfg.seeds[..1]
            };
            for &seed in seeds {
                let key = RunKey {
                    problem,
                    scalarizer,
                    model: ModelKind::Gaussian,
                    seed,
                };
                let dir = if with_gaussian {
                    key.dir(root)
                } else {
                    root.join("pilot").join(problem.name()).join(scalarizer.name())
                };
                first.push(Job {
                    config: train_config(cfg, &key, None),
                    key,
                    dir,
                });
            }
        }
    }
    let mut records = BTreeMap::new();
    let mut failures = Vec::new();
    let mut param_targets = BTreeMap::new();
    for (key, result) in execute(first, &evals, cfg, &pool) {
        match result {
            Ok(r) => {
                if key.seed == pilot_seed {
                    param_targets.insert((key.problem, key.scalarizer), r.parameter_count);
                }
                if with_gaussian {
                    records.insert(key, r);
                }
            }
            Err(message) => failures.push(RunFailure { key, message }),
        }
    }

    let mut second = Vec::new();
    for &problem in &cfg.problems {
        for &scalarizer in &cfg.scalarizers {
            for &model in cfg.models.iter().filter(|m| **m != ModelKind::Gaussian) {
                for &seed in &cfg.seeds {
                    let key = RunKey {
                        problem,
                        scalarizer,
                        model,
                        seed,
                    };
                    match param_targets.get(&(problem, scalarizer)) {
                        Some(&t) => second.push(Job {
                            config: train_config(cfg, &key, Some(t)),
                            dir: key.dir(root),
                            key,
                        }),
                        None => failures.push(RunFailure {
                            key,
                            message: "pilot Gaussian run failed; no parameter target".into(),
                        }),
                    }
                }
            }
        }
    }
    for (key, result) in execute(second, &evals, cfg, &pool) {
        match result {
            Ok(r) => {
                records.insert(key, r);
            }
            Err(message) => failures.push(RunFailure { key, message }),
        }
    }
    failures.sort_by_key(|f| f.key);

    let summary = summarize(cfg, &records, &failures, &param_targets);
    summary.write_csv(&root.join("summary.csv"))?;
    summary.write_table_csv(&root.join("table.csv"), &cfg.scalarizers)?;
    if !failures.is_empty() {
        let path = root.join("failures.json");
        let json = serde_json::to_string_pretty(&failures).map_err(|e| HarnessError::io(&path, e))?;
        std::fs::write(&path, json).map_err(|e| HarnessError::io(&path, e))?;
    }
    Ok(SuiteResult {
        records,
        failures,
        summary,
        param_targets,
    })
}

fn summarize(
    cfg: &ExperimentConfig,
    records: &BTreeMap<RunKey, RunRecord>,
    failures: &[RunFailure],
    targets: &BTreeMap<(ProblemId, Method), usize>,
) -> SummaryTable {
    let mut rows = Vec::new();
    for &problem in &cfg.problems {
        for &model in &cfg.models {
            for &scalarizer in &cfg.scalarizers {
                let cell: Vec<&RunRecord> = records
                    .iter()
                    .filter(|(k, _)| k.problem == problem && k.model == model && k.scalarizer == scalarizer)
                    .map(|(_, r)| r)
                    .collect();
                let lhds: Vec<f64> = cell.iter().map(|r| r.final_lhd).collect();
                let mut flags = Vec::new();
                let tripped = cell.iter().filter(|r| r.guard_tripped).count();
                if tripped > 0 {
                    flags.push(format!("guard={tripped}"));
                }
                let failed = failures
                    .iter()
                    .filter(|f| {
                        f.key.problem == problem && f.key.model == model && f.key.scalarizer == scalarizer
                    })
                    .count();
                if failed > 0 {
                    flags.push(format!("failed={failed}"));
                }
                if model != ModelKind::Gaussian {
                    if let Some(&t) = targets.get(&(problem, scalarizer)) {
                        let off = cell
                            .iter()
                            .any(|r| r.parameter_count.abs_diff(t) as f64 > 0.05 * t as f64);
                        if off {
                            flags.push("parity".into());
                        }
                    }
                }
                rows.push(SummaryRow {
                    problem,
                    model,
                    scalarizer,
                    mean_lhd: if lhds.is_empty() { f64::NAN } else { mean(&lhds) },
                    std_lhd: sample_std(&lhds),
                    n_runs: lhds.len(),
                    flags: flags.join(";"),
                });
            }
        }
    }
    SummaryTable { rows }
}

impl SummaryTable {
    pub fn get(&self, problem: ProblemId, model: ModelKind, scalarizer: Method) -> Option<&SummaryRow> {
        self.rows
            .iter()
            .find(|r| r.problem == problem && r.model == model && r.scalarizer == scalarizer)
    }

    /// `problem,model,scalarizer,mean_lhd,std_lhd,n_runs,flags`.
    pub fn write_csv(&self, path: &Path) -> Result<(), HarnessError> {
        write_table(
            path,
            &[
                "problem",
                "model",
                "scalarizer",
                "mean_lhd",
                "std_lhd",
                "n_runs",
                "flags",
            ],
            self.rows
                .iter()
                .map(|r| {
                    vec![
                        r.problem.to_string(),
                        r.model.to_string(),
                        r.scalarizer.to_string(),
                        format!("{:?}", r.mean_lhd),
                        format!("{:?}", r.std_lhd),
                        r.n_runs.to_string(),
                        r.flags.clone(),
                    ]
                })
                .collect(),
        )
    }

    /// Rows are problem × model, columns scalarizers, cells
    /// `mean (std) n=<runs>`.
    pub fn write_table_csv(&self, path: &Path, scalarizers: &[Method]) -> Result<(), HarnessError> {
        let mut header = vec!["problem".to_string(), "model".to_string()];
        header.extend(scalarizers.iter().map(|s| s.name().to_uppercase()));
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let mut rows = Vec::new();
        let mut seen = Vec::new();
        for r in &self.rows {
            if seen.contains(&(r.problem, r.model)) {
                continue;
            }
            seen.push((r.problem, r.model));
            let mut row = vec![r.problem.to_string(), r.model.to_string()];
            for &s in scalarizers {
                row.push(match self.get(r.problem, r.model, s) {
                    Some(c) if c.n_runs > 0 => {
                        format!("{:.3} ({:.3}) n={}", c.mean_lhd, c.std_lhd, c.n_runs)
                    }
                    _ => "n=0".into(),
                });
            }
            rows.push(row);
        }
        write_table(path, &header, rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn statistics() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(sample_std(&[5.0]), 0.0);
        assert!((sample_std(&[1.0, 2.0, 3.0, 4.0]) - 1.2909944487358056).abs() < 1e-15);
    }
}
