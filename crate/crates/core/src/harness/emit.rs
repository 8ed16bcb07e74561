use std::path::Path;

use serde::Serialize;

use super::{ExperimentConfig, HarnessError};
use crate::psl_model::RunRecord;

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>, HarnessError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    csv::Writer::from_path(path).map_err(|e| HarnessError::io(path, e))
}

fn write_rows<I, R>(path: &Path, header: &[&str], rows: I) -> Result<(), HarnessError>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = writer(path)?;
    w.write_record(header).map_err(|e| HarnessError::io(path, e))?;
    for r in rows {
        w.write_record(r).map_err(|e| HarnessError::io(path, e))?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

/// Front as CSV with header `f1,...,fk`, values at full precision.
pub fn write_front_csv(front: &[Vec<f64>], path: &Path) -> Result<(), HarnessError> {
    let k = front.first().map_or(0, Vec::len);
    let header: Vec<String> = (1..=k).map(|i| format!("f{i}")).collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    write_rows(
        path,
        &header,
        front
            .iter()
            .map(|p| p.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>()),
    )
}

/// `loss_curve.csv` (`iteration,loss`) and `lhd_curve.csv` (`iteration,lhd`).
pub fn emit_curves(record: &RunRecord, dir: &Path) -> Result<(), HarnessError> {
    write_rows(
        &dir.join("loss_curve.csv"),
        &["iteration", "loss"],
        record
            .loss_curve
            .iter()
            .enumerate()
            .map(|(i, l)| vec![(i + 1).to_string(), format!("{l:?}")]),
    )?;
    write_rows(
        &dir.join("lhd_curve.csv"),
        &["iteration", "lhd"],
        record
            .lhd_curve
            .iter()
            .map(|p| vec![p.iteration.to_string(), format!("{:?}", p.lhd)]),
    )
}

#[derive(Serialize)]
struct RunJson<'a> {
    experiment: &'a ExperimentConfig,
    #[serde(flatten)]
    record: &'a RunRecord,
}

/// Writes `run.json`, `front.csv`, both curves and `census.csv` into `dir`.
pub fn emit_run(record: &RunRecord, experiment: &ExperimentConfig, dir: &Path) -> Result<(), HarnessError> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let json_path = dir.join("run.json");
    let json = serde_json::to_string_pretty(&RunJson { experiment, record })
        .map_err(|e| HarnessError::io(&json_path, e))?;
    std::fs::write(&json_path, json).map_err(|e| HarnessError::io(&json_path, e))?;
    write_front_csv(&record.final_front, &dir.join("front.csv"))?;
    emit_curves(record, dir)?;
    write_rows(
        &dir.join("census.csv"),
        &["iteration", "pruned", "cloned", "split", "total"],
        record.census.iter().map(|c| {
            vec![
                c.iteration.to_string(),
                c.pruned.to_string(),
                c.cloned.to_string(),
                c.split.to_string(),
                c.total.to_string(),
            ]
        }),
    )
}

pub(crate) fn write_table(path: &Path, header: &[&str], rows: Vec<Vec<String>>) -> Result<(), HarnessError> {
    write_rows(path, header, rows)
}
