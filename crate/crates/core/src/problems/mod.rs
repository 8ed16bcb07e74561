//! Benchmark problems: ZDT3, DTLZ5, DTLZ7 and the RE21/RE36/RE37
//! engineering problems, with their reference fronts.

mod formulas;
mod front;

pub use formulas::{dtlz5, dtlz7, re21, re36, re37, zdt3};
pub use front::{ideal_and_nadir, reference_front, FrontProvenance, ReferenceFront};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diffcore::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unknown problem `{0}`")]
    Unknown(String),
    #[error("reference front i/o at {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ProblemId {
    #[serde(rename = "ZDT3", alias = "zdt3")]
    Zdt3,
    #[serde(rename = "DTLZ5", alias = "dtlz5")]
    Dtlz5,
    #[serde(rename = "DTLZ7", alias = "dtlz7")]
    Dtlz7,
    #[serde(rename = "RE21", alias = "re21")]
    Re21,
    #[serde(rename = "RE36", alias = "re36")]
    Re36,
    #[serde(rename = "RE37", alias = "re37")]
    Re37,
}

impl ProblemId {
    pub const ALL: [ProblemId; 6] = [
        ProblemId::Dtlz5,
        ProblemId::Dtlz7,
        ProblemId::Re21,
        ProblemId::Re36,
        ProblemId::Re37,
        ProblemId::Zdt3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProblemId::Zdt3 => "ZDT3",
            ProblemId::Dtlz5 => "DTLZ5",
            ProblemId::Dtlz7 => "DTLZ7",
            ProblemId::Re21 => "RE21",
            ProblemId::Re36 => "RE36",
            ProblemId::Re37 => "RE37",
        }
    }
}

impl fmt::Display for ProblemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemId {
    type Err = ProblemError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| ProblemError::Unknown(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrontType {
    Convex,
    Disconnected,
    Degenerate,
    Irregular,
}

/// Affine map applied to raw objectives: `(f - offset) / scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveScaling {
    pub offset: Vec<f64>,
    pub scale: Vec<f64>,
}

/// A benchmark definition. Objectives are always minimised.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub id: ProblemId,
    pub k: usize,
    pub n: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub front_type: FrontType,
    /// Present for the RE problems, whose raw objectives differ in magnitude
    /// by orders of magnitude.
    pub scaling: Option<ObjectiveScaling>,
}

// Ideal point and nadir-minus-ideal extent of each sampled RE front, rounded
// outward so every objective lands roughly in [0, 1].
const RE21_SCALING: ([f64; 2], [f64; 2]) = ([1258.0, 0.0031], [1593.0, 0.0386]);
const RE36_SCALING: ([f64; 3], [f64; 3]) = ([0.0, 13.6, 0.0], [5.84, 34.0, 0.342]);
const RE37_SCALING: ([f64; 3], [f64; 3]) = ([0.0, 0.0, -0.37], [1.0, 1.08, 1.43]);

impl ProblemSpec {
    pub fn new(id: ProblemId) -> Self {
        let s2 = 2.0f64.sqrt();
        let unit = |n: usize| (vec![0.0; n], vec![1.0; n]);
        let scaled = |(o, s): (&[f64], &[f64])| {
            Some(ObjectiveScaling {
                offset: o.to_vec(),
                scale: s.to_vec(),
            })
        };
        let (k, n, (lower, upper), front_type, scaling) = match id {
            ProblemId::Zdt3 => (2, 10, unit(10), FrontType::Disconnected, None),
            ProblemId::Dtlz5 => (3, 10, unit(10), FrontType::Degenerate, None),
            ProblemId::Dtlz7 => (3, 10, unit(10), FrontType::Disconnected, None),
            ProblemId::Re21 => (
                2,
                4,
                (vec![1.0, s2, s2, 1.0], vec![3.0; 4]),
                FrontType::Convex,
                scaled((&RE21_SCALING.0, &RE21_SCALING.1)),
            ),
            ProblemId::Re36 => (
                3,
                4,
                (vec![12.0; 4], vec![60.0; 4]),
                FrontType::Degenerate,
                scaled((&RE36_SCALING.0, &RE36_SCALING.1)),
            ),
            ProblemId::Re37 => (
                3,
                4,
                unit(4),
                FrontType::Irregular,
                scaled((&RE37_SCALING.0, &RE37_SCALING.1)),
            ),
        };
        Self {
            id,
            k,
            n,
            lower,
            upper,
            front_type,
            scaling,
        }
    }

    pub fn bounds(&self) -> (&[f64], &[f64]) {
        (&self.lower, &self.upper)
    }

    /// Raw objectives as published, no scaling, no bound checks.
    pub fn evaluate_raw<T: Real>(&self, x: &[T]) -> Vec<T> {
        match self.id {
            ProblemId::Zdt3 => zdt3(x),
            ProblemId::Dtlz5 => dtlz5(x),
            ProblemId::Dtlz7 => dtlz7(x),
            ProblemId::Re21 => re21(x),
            ProblemId::Re36 => re36(x),
            ProblemId::Re37 => re37(x),
        }
    }

    /// Objectives in the working (scaled) space, without bound checks. Used
    /// on the tape during training.
    pub fn evaluate_generic<T: Real>(&self, x: &[T]) -> Vec<T> {
        let raw = self.evaluate_raw(x);
        match &self.scaling {
            None => raw,
            Some(s) => raw
                .into_iter()
                .zip(s.offset.iter().zip(&s.scale))
                .map(|(f, (&o, &c))| (f - o) / c)
                .collect(),
        }
    }

    /// Checked evaluation in the working objective space.
    pub fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>, ProblemError> {
        self.check_decision(x)?;
        Ok(self.evaluate_generic(x))
    }

    pub fn check_decision(&self, x: &[f64]) -> Result<(), ProblemError> {
        if x.len() != self.n {
            return Err(ProblemError::InvalidArgument(format!(
                "{} expects {} decision variables, got {}",
                self.id,
                self.n,
                x.len()
            )));
        }
        for (i, ((&v, &lo), &hi)) in x.iter().zip(&self.lower).zip(&self.upper).enumerate() {
            if !(v >= lo && v <= hi) {
                return Err(ProblemError::InvalidArgument(format!(
                    "{}: x[{i}] = {v} outside [{lo}, {hi}]",
                    self.id
                )));
            }
        }
        Ok(())
    }

    pub fn default_front_density(&self) -> usize {
        if self.k == 2 {
            1000
        } else {
            5000
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimensions_match_benchmark_table() {
        let dims: Vec<(ProblemId, usize, usize)> = ProblemId::ALL
            .iter()
            .map(|&id| {
                let p = ProblemSpec::new(id);
                (id, p.k, p.n)
            })
            .collect();
        assert!(dims.contains(&(ProblemId::Re21, 2, 4)));
        assert!(dims.contains(&(ProblemId::Dtlz7, 3, 10)));
        assert!(dims.contains(&(ProblemId::Zdt3, 2, 10)));
        assert!(dims.contains(&(ProblemId::Dtlz5, 3, 10)));
        assert!(dims.contains(&(ProblemId::Re36, 3, 4)));
        assert!(dims.contains(&(ProblemId::Re37, 3, 4)));
        for &id in &ProblemId::ALL {
            let p = ProblemSpec::new(id);
            assert!(p.lower.iter().zip(&p.upper).all(|(l, u)| l < u));
            assert_eq!(p.lower.len(), p.n);
        }
    }

    #[test]
    fn zdt3_known_points() {
        let p = ProblemSpec::new(ProblemId::Zdt3);
        let y = p.evaluate(&[0.0; 10]).unwrap();
        assert_eq!(y, vec![0.0, 1.0]);
        let mut x = [0.0; 10];
        x[0] = 1.0;
        let y = p.evaluate(&x).unwrap();
        assert_eq!(y[0], 1.0);
        assert!(y[1].abs() < 1e-14);
    }

    #[test]
    fn dtlz7_origin() {
        let p = ProblemSpec::new(ProblemId::Dtlz7);
        assert_eq!(p.evaluate(&[0.0; 10]).unwrap(), vec![0.0, 0.0, 6.0]);
    }

    #[test]
    fn bounds_of_suites() {
        let z = ProblemSpec::new(ProblemId::Zdt3);
        assert_eq!(z.bounds(), (&[0.0; 10][..], &[1.0; 10][..]));
        let d = ProblemSpec::new(ProblemId::Dtlz5);
        assert_eq!(d.bounds(), (&[0.0; 10][..], &[1.0; 10][..]));
        let r = ProblemSpec::new(ProblemId::Re21);
        let s2 = 2.0f64.sqrt();
        assert_eq!(r.bounds(), (&[1.0, s2, s2, 1.0][..], &[3.0; 4][..]));
    }

    #[test]
    fn out_of_bounds_rejected() {
        let p = ProblemSpec::new(ProblemId::Re37);
        assert!(p.evaluate(&[0.5, 0.5, 1.2, 0.5]).is_err());
        assert!(p.evaluate(&[0.5, 0.5, 0.5]).is_err());
        assert!(p.evaluate(&[f64::NAN, 0.5, 0.5, 0.5]).is_err());
    }

    #[test]
    fn parse_names() {
        assert_eq!("re37".parse::<ProblemId>().unwrap(), ProblemId::Re37);
        assert!("zdt1".parse::<ProblemId>().is_err());
    }
}
