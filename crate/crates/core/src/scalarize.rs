//! Scalarization functions turning an objective vector and a preference into
//! one loss value, plus preference sampling.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diffcore::{max_of, sum_of, Real};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScalarizeError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unknown scalarization `{0}` (expected ls, tch, mtch or cosmos)")]
    Unknown(String),
}

/// Point on the probability simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreferenceVector(Vec<f64>);

impl PreferenceVector {
    pub fn new(values: Vec<f64>) -> Result<Self, ScalarizeError> {
        let sum: f64 = values.iter().sum();
        if values.iter().any(|&v| !(v >= 0.0)) || (sum - 1.0).abs() > 1e-12 {
            return Err(ScalarizeError::InvalidArgument(format!(
                "{values:?} is not on the simplex"
            )));
        }
        Ok(Self(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Flat-Dirichlet preference samples.
pub fn sample_preferences<R: Rng + ?Sized>(
    k: usize,
    count: usize,
    rng: &mut R,
) -> Result<Vec<PreferenceVector>, ScalarizeError> {
    if k < 2 || count < 1 {
        return Err(ScalarizeError::InvalidArgument(format!(
            "need k >= 2 and count >= 1, got k = {k}, count = {count}"
        )));
    }
    Ok((0..count)
        .map(|_| PreferenceVector(flat_dirichlet(k, rng)))
        .collect())
}

/// One Dirichlet(1, …, 1) draw: normalized unit-exponential variates.
pub fn flat_dirichlet<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    let v: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect();
    let s: f64 = v.iter().sum();
    v.into_iter().map(|x| x / s).collect()
}

/// Structured simplex lattice used as the fixed evaluation grid: 200 points
/// on the segment for two objectives, the 210-point lattice with 19
/// divisions for three.
pub fn evaluation_grid(k: usize) -> Vec<Vec<f64>> {
    match k {
        2 => (0..200)
            .map(|i| {
                let a = i as f64 / 199.0;
                vec![a, 1.0 - a]
            })
            .collect(),
        3 => simplex_lattice(3, 19),
        _ => simplex_lattice(k, 6),
    }
}

/// All points with coordinates `i / divisions` summing to one.
pub fn simplex_lattice(k: usize, divisions: usize) -> Vec<Vec<f64>> {
    fn rec(k: usize, left: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for i in 0..=left {
            prefix.push(i);
            rec(k - 1, left - i, prefix, out);
            prefix.pop();
        }
    }
    let mut raw = Vec::new();
    rec(k, divisions, &mut Vec::new(), &mut raw);
    raw.into_iter()
        .map(|c| c.into_iter().map(|i| i as f64 / divisions as f64).collect())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Ls,
    Tch,
    Mtch,
    Cosmos,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Mtch, Method::Tch, Method::Cosmos, Method::Ls];

    pub fn name(self) -> &'static str {
        match self {
            Method::Ls => "ls",
            Method::Tch => "tch",
            Method::Mtch => "mtch",
            Method::Cosmos => "cosmos",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = ScalarizeError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| ScalarizeError::Unknown(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IdealSource {
    /// Ideal point taken from the reference front.
    Fixed,
    /// Running minimum of every objective value seen during the run.
    RunningMin,
}

/// How the Chebyshev gap is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TchGap {
    /// `λ_i (y_i − z_i)`
    Signed,
    /// `λ_i |y_i − z_i|`
    Absolute,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScalarizerConfig {
    pub method: Method,
    pub ideal: IdealSource,
    pub ideal_margin: f64,
    pub cosmos_penalty: f64,
    pub guard: f64,
    pub tch_gap: TchGap,
}

impl Default for ScalarizerConfig {
    fn default() -> Self {
        Self {
            method: Method::Tch,
            ideal: IdealSource::RunningMin,
            ideal_margin: 0.1,
            cosmos_penalty: 1.0,
            guard: 1e-6,
            tch_gap: TchGap::Signed,
        }
    }
}

impl ScalarizerConfig {
    pub fn with_method(method: Method) -> Self {
        Self {
            method,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), ScalarizeError> {
        if !(self.cosmos_penalty >= 0.0) || !(self.ideal_margin >= 0.0) || !(self.guard > 0.0) {
            return Err(ScalarizeError::InvalidArgument(format!(
                "penalty {} and margin {} must be >= 0, guard {} > 0",
                self.cosmos_penalty, self.ideal_margin, self.guard
            )));
        }
        Ok(())
    }

    /// Applies the configured scalarization.
    pub fn apply<T: Real>(&self, y: &[T], pref: &[f64], ideal: &[f64]) -> T {
        match self.method {
            Method::Ls => linear(y, pref),
            Method::Tch => match self.tch_gap {
                TchGap::Signed => tchebycheff(y, pref, ideal),
                TchGap::Absolute => tchebycheff_abs(y, pref, ideal),
            },
            Method::Mtch => modified_tchebycheff(y, pref, ideal, self.guard),
            Method::Cosmos => cosmos(y, pref, self.cosmos_penalty),
        }
    }
}

/// `Σ λ_i y_i`
pub fn linear<T: Real>(y: &[T], pref: &[f64]) -> T {
    let terms: Vec<T> = y.iter().zip(pref).map(|(&v, &l)| v * l).collect();
    sum_of(&terms)
}

/// `max_i λ_i (y_i − z_i)`
pub fn tchebycheff<T: Real>(y: &[T], pref: &[f64], ideal: &[f64]) -> T {
    let terms: Vec<T> = y
        .iter()
        .zip(pref.iter().zip(ideal))
        .map(|(&v, (&l, &z))| (v - z) * l)
        .collect();
    max_of(&terms)
}

/// `max_i λ_i |y_i − z_i|`
pub fn tchebycheff_abs<T: Real>(y: &[T], pref: &[f64], ideal: &[f64]) -> T {
    let terms: Vec<T> = y
        .iter()
        .zip(pref.iter().zip(ideal))
        .map(|(&v, (&l, &z))| (v - z).abs() * l)
        .collect();
    max_of(&terms)
}

/// `max_i (y_i − z_i) / max(λ_i, guard)`
pub fn modified_tchebycheff<T: Real>(y: &[T], pref: &[f64], ideal: &[f64], guard: f64) -> T {
    let terms: Vec<T> = y
        .iter()
        .zip(pref.iter().zip(ideal))
        .map(|(&v, (&l, &z))| (v - z) / l.max(guard))
        .collect();
    max_of(&terms)
}

/// `Σ λ_i y_i − penalty · cos∠(λ, y)`; the cosine term is zero when `y = 0`.
pub fn cosmos<T: Real>(y: &[T], pref: &[f64], penalty: f64) -> T {
    let ls = linear(y, pref);
    if penalty == 0.0 {
        return ls;
    }
    let norm_sq = sum_of(&y.iter().map(|&v| v.square()).collect::<Vec<_>>());
    if norm_sq.value() <= 0.0 {
        return ls;
    }
    let pref_norm = pref.iter().map(|l| l * l).sum::<f64>().sqrt();
    let cos = ls / (norm_sq.sqrt() * pref_norm);
    ls - cos * penalty
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn linear_cases() {
        assert_eq!(linear(&[3.0, 7.0], &[1.0, 0.0]), 3.0);
        assert_eq!(linear(&[1.0, 3.0], &[0.5, 0.5]), 2.0);
    }

    #[test]
    fn tchebycheff_cases() {
        assert_eq!(tchebycheff(&[1.0, 2.0], &[0.5, 0.5], &[0.0, 0.0]), 1.0);
        assert_eq!(tchebycheff(&[0.3, 0.4], &[0.2, 0.8], &[0.3, 0.4]), 0.0);
    }

    #[test]
    fn modified_tchebycheff_cases() {
        assert_eq!(
            modified_tchebycheff(&[1.0, 2.0], &[0.5, 0.5], &[0.0, 0.0], 1e-6),
            4.0
        );
        assert_eq!(
            modified_tchebycheff(&[0.3, 0.4], &[0.2, 0.8], &[0.3, 0.4], 1e-6),
            0.0
        );
        let v = modified_tchebycheff(&[1.0, 2.0], &[1.0, 0.0], &[0.0, 0.0], 1e-6);
        assert!(v.is_finite());
        assert_eq!(v, 2.0e6);
    }

    #[test]
    fn cosmos_cases() {
        assert!(cosmos(&[1.0, 0.0], &[1.0, 0.0], 1.0).abs() < 1e-15);
        assert_eq!(
            cosmos(&[0.4, 0.9], &[0.3, 0.7], 0.0),
            linear(&[0.4, 0.9], &[0.3, 0.7])
        );
        assert_eq!(cosmos(&[0.0, 0.0], &[0.3, 0.7], 1.0), 0.0);
    }

    #[test]
    fn preference_sampling_rejects_degenerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(sample_preferences(1, 5, &mut rng).is_err());
        assert!(sample_preferences(3, 0, &mut rng).is_err());
    }

    #[test]
    fn samples_on_simplex() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for p in sample_preferences(3, 1000, &mut rng).unwrap() {
            let s: f64 = p.as_slice().iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
            assert!(p.as_slice().iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn grids_have_expected_sizes() {
        assert_eq!(evaluation_grid(2).len(), 200);
        assert_eq!(evaluation_grid(3).len(), 210);
        for p in evaluation_grid(3) {
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn parse_methods() {
        assert_eq!("MTCH".parse::<Method>().unwrap(), Method::Mtch);
        assert!("pbi".parse::<Method>().is_err());
    }
}
