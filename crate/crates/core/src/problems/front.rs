use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ProblemError, ProblemId, ProblemSpec};
use crate::metrics::filter_nondominated;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrontProvenance {
    Analytic,
    Sampled,
}

/// Non-dominated approximation of a problem's Pareto front, in the working
/// (scaled) objective space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceFront {
    pub points: Vec<Vec<f64>>,
    pub provenance: FrontProvenance,
    pub density: usize,
}

/// Decision-space samples drawn for the sampled (RE) fronts.
pub const RE_FRONT_SAMPLES: u32 = 1_000_000;

/// Evenly thins a lexicographically sorted set to at most `count` points,
/// always keeping both ends.
fn thin(points: Vec<Vec<f64>>, count: usize) -> Vec<Vec<f64>> {
    if points.len() <= count {
        return points;
    }
    let last = points.len() - 1;
    let mut idx: Vec<usize> = (0..count)
        .map(|i| ((i as f64) * last as f64 / (count - 1) as f64).round() as usize)
        .collect();
    idx.dedup();
    idx.into_iter().map(|i| points[i].clone()).collect()
}

fn zdt3_front(density: usize) -> Vec<Vec<f64>> {
    let grid = density * 200;
    let pts: Vec<Vec<f64>> = (0..=grid)
        .map(|i| {
            let f1 = i as f64 / grid as f64;
            let f2 = 1.0 - f1.sqrt() - f1 * (10.0 * std::f64::consts::PI * f1).sin();
            vec![f1, f2]
        })
        .collect();
    thin(filter_nondominated(&pts), density)
}

fn dtlz5_front(density: usize) -> Vec<Vec<f64>> {
    (0..density)
        .map(|i| {
            let t = FRAC_PI_2 * i as f64 / (density - 1) as f64;
            let (s, c) = t.sin_cos();
            let a = c * FRAC_1_SQRT_2;
            vec![a, a, s]
        })
        .collect()
}

fn dtlz7_front(density: usize) -> Vec<Vec<f64>> {
    // About a quarter of the (f1, f2) square is non-dominated.
    let side = ((density as f64 * 16.0).sqrt().ceil() as usize).max(10);
    let mut pts = Vec::with_capacity(side * side);
    for i in 0..side {
        for j in 0..side {
            let x = [i as f64 / (side - 1) as f64, j as f64 / (side - 1) as f64];
            let h: f64 = 3.0
                - x.iter()
                    .map(|&f| f / 2.0 * (1.0 + (3.0 * std::f64::consts::PI * f).sin()))
                    .sum::<f64>();
            pts.push(vec![x[0], x[1], 2.0 * h]);
        }
    }
    thin(filter_nondominated(&pts), density)
}

fn sampled_front(spec: &ProblemSpec, density: usize) -> Vec<Vec<f64>> {
    let (lo, hi) = spec.bounds();
    let mut x = vec![0.0; spec.n];
    let mut pts = Vec::with_capacity(RE_FRONT_SAMPLES as usize);
    for i in 0..RE_FRONT_SAMPLES {
        for (d, v) in x.iter_mut().enumerate() {
            // The sampler caps the index at 2^16, so each block gets its own scramble seed.
            let u = sobol_burley::sample(i & 0xffff, d as u32, 0x5eed + (i >> 16)) as f64;
            *v = lo[d] + u * (hi[d] - lo[d]);
        }
        pts.push(spec.evaluate_generic(&x));
    }
    thin(filter_nondominated(&pts), density)
}

/// Builds the reference front with about `density` points.
///
/// ZDT3, DTLZ5 and DTLZ7 use their closed-form front parameterisations
/// (followed by non-dominated filtering where the parameter domain includes
/// dominated regions). RE fronts are approximated from quasi-random decision
/// samples.
pub fn reference_front(spec: &ProblemSpec, density: usize) -> Result<ReferenceFront, ProblemError> {
    if density < 100 {
        return Err(ProblemError::InvalidArgument(format!(
            "reference front density must be at least 100, got {density}"
        )));
    }
    let (points, provenance) = match spec.id {
        ProblemId::Zdt3 => (zdt3_front(density), FrontProvenance::Analytic),
        ProblemId::Dtlz5 => (dtlz5_front(density), FrontProvenance::Analytic),
        ProblemId::Dtlz7 => (dtlz7_front(density), FrontProvenance::Analytic),
        ProblemId::Re21 | ProblemId::Re36 | ProblemId::Re37 => {
            (sampled_front(spec, density), FrontProvenance::Sampled)
        }
    };
    Ok(ReferenceFront {
        points,
        provenance,
        density,
    })
}

/// Elementwise minimum and maximum of a front.
pub fn ideal_and_nadir(points: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<f64>), ProblemError> {
    let first = points
        .first()
        .ok_or_else(|| ProblemError::InvalidArgument("empty front".into()))?;
    let mut ideal = first.clone();
    let mut nadir = first.clone();
    for p in &points[1..] {
        for (d, &v) in p.iter().enumerate() {
            ideal[d] = ideal[d].min(v);
            nadir[d] = nadir[d].max(v);
        }
    }
    Ok((ideal, nadir))
}

impl ReferenceFront {
    /// CSV with header `f1,...,fk`, one objective vector per line.
    pub fn write_csv(&self, path: &Path) -> Result<(), ProblemError> {
        let io = |e: &dyn std::fmt::Display| ProblemError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        };
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| io(&e))?;
        }
        let mut w = csv::Writer::from_path(path).map_err(|e| io(&e))?;
        let k = self.points.first().map_or(0, Vec::len);
        w.write_record((1..=k).map(|i| format!("f{i}")))
            .map_err(|e| io(&e))?;
        for p in &self.points {
            w.write_record(p.iter().map(|v| format!("{v:?}")))
                .map_err(|e| io(&e))?;
        }
        w.flush().map_err(|e| io(&e))
    }

    pub fn read_csv(path: &Path, provenance: FrontProvenance, density: usize) -> Result<Self, ProblemError> {
        let io = |e: &dyn std::fmt::Display| ProblemError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        };
        let mut r = csv::Reader::from_path(path).map_err(|e| io(&e))?;
        let mut points = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| io(&e))?;
            let p = rec
                .iter()
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<Vec<f64>, _>>()
                .map_err(|e| io(&e))?;
            points.push(p);
        }
        Ok(Self {
            points,
            provenance,
            density,
        })
    }

    /// Loads `<dir>/<problem>_<density>.csv`, generating and writing it when absent.
    pub fn load_or_generate(spec: &ProblemSpec, density: usize, dir: &Path) -> Result<Self, ProblemError> {
        let path = dir.join(format!("{}_{density}.csv", spec.id));
        let provenance = match spec.id {
            ProblemId::Re21 | ProblemId::Re36 | ProblemId::Re37 => FrontProvenance::Sampled,
            _ => FrontProvenance::Analytic,
        };
        if path.exists() {
            return Self::read_csv(&path, provenance, density);
        }
        let front = reference_front(spec, density)?;
        front.write_csv(&path)?;
        Ok(front)
    }
}
