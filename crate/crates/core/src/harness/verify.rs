//! Self-checks against brute-force or numeric oracles, run by the `verify`
//! CLI verb.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use ordered_float::OrderedFloat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::HarnessError;
use crate::diffcore::{finite_diff_check, DiffError};
use crate::gaussian_partition::{angle_count, build_rotation, AdcConfig};
use crate::metrics::{dominates, filter_nondominated, hv_monte_carlo, hypervolume};
use crate::problems::{ProblemId, ProblemSpec};
use crate::psl_model::{scalarized_loss, GaussianPslModel, ParetoSetModel};
use crate::scalarize::{flat_dirichlet, Method, ScalarizerConfig};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: String) -> Self {
        Self {
            name: name.into(),
            passed,
            detail,
        }
    }
}

/// Random mutually non-dominated points on the simplex `sum(y) = 1`.
fn simplex_front(rng: &mut ChaCha8Rng, k: usize, count: usize) -> Vec<Vec<f64>> {
    (0..count).map(|_| flat_dirichlet(k, rng)).collect()
}

fn hv_check(seed: u64) -> Result<Check, HarnessError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let front = simplex_front(&mut rng, 3, 40);
    let reference = [1.1, 1.1, 1.1];
    let exact = hypervolume(&front, &reference)?;
    let (mc, se) = hv_monte_carlo(&front, &reference, 200_000, seed)?;
    let passed = (exact - mc).abs() <= 4.0 * se + 1e-9;
    Ok(Check::new(
        "hypervolume_vs_monte_carlo",
        passed,
        format!("exact {exact:.6}, estimate {mc:.6} +/- {se:.2e}"),
    ))
}

fn rotation_check(seed: u64) -> Result<Check, HarnessError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for m in 2..=6 {
        for _ in 0..20 {
            let angles: Vec<f64> = (0..angle_count(m))
                .map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
                .collect();
            let r = build_rotation(&angles, m)?;
            let gram = r.transpose() * &r - DMatrix::<f64>::identity(m, m);
            worst = worst.max(gram.amax()).max((r.determinant() - 1.0).abs());
        }
    }
    Ok(Check::new(
        "rotation_orthonormal",
        worst < 1e-9,
        format!("max deviation {worst:.2e} over m = 2..6"),
    ))
}

fn dominance_check(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = 0;
    let mut mismatches = 0;
    for k in 2..=4 {
        // Coarse grid values force ties and duplicates.
        let points: Vec<Vec<f64>> = (0..150)
            .map(|_| (0..k).map(|_| f64::from(rng.random_range(0..8u8))).collect())
            .collect();
        let brute: BTreeSet<Vec<OrderedFloat<f64>>> = points
            .iter()
            .filter(|p| !points.iter().any(|q| dominates(q, p)))
            .map(|p| p.iter().copied().map(OrderedFloat).collect())
            .collect();
        let fast: BTreeSet<Vec<OrderedFloat<f64>>> = filter_nondominated(&points)
            .into_iter()
            .map(|p| p.into_iter().map(OrderedFloat).collect())
            .collect();
        total += brute.len();
        mismatches += brute.symmetric_difference(&fast).count();
    }
    Check::new(
        "dominance_filter_vs_brute_force",
        mismatches == 0,
        format!("{mismatches} mismatches over {total} non-dominated points"),
    )
}

/// Two-objective, three-variable instance of ZDT3.
fn small_zdt3() -> ProblemSpec {
    let mut p = ProblemSpec::new(ProblemId::Zdt3);
    p.n = 3;
    p.lower = vec![0.0; 3];
    p.upper = vec![1.0; 3];
    p
}

fn gradient_check(seed: u64, method: Method) -> Result<Check, HarnessError> {
    let problem = small_zdt3();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let adc = AdcConfig {
        initial_count: 2,
        ..AdcConfig::default()
    };
    let model = GaussianPslModel::new(&problem, adc, &mut rng)?;
    let prefs: Vec<Vec<f64>> = (0..3).map(|_| flat_dirichlet(2, &mut rng)).collect();
    let scalarizer = ScalarizerConfig {
        method,
        ..ScalarizerConfig::default()
    };
    let ideal = [-0.1, -0.9];
    let worst = finite_diff_check(model.store(), 1e-6, |tape, store| {
        let fwd = model
            .forward_with(tape, store, &prefs)
            .map_err(|e| DiffError::InvalidState(e.to_string()))?;
        let objectives: Vec<_> = fwd
            .iter()
            .map(|f| problem.evaluate_generic(&f.x.components()))
            .collect();
        let entropies: Vec<_> = fwd.iter().map(|f| f.entropy).collect();
        scalarized_loss(&objectives, &entropies, &prefs, &scalarizer, &ideal, 0.1)
            .map_err(|e| DiffError::InvalidState(e.to_string()))
    })?;
    Ok(Check::new(
        format!("loss_gradient_vs_central_differences_{method}"),
        worst < 1e-4,
        format!(
            "max relative error {worst:.2e} over {} parameters",
            model.parameter_count()
        ),
    ))
}

/// Runs every check. `seed` drives all random inputs.
pub fn run_all(seed: u64) -> Result<Vec<Check>, HarnessError> {
    let mut out = vec![hv_check(seed)?, rotation_check(seed)?, dominance_check(seed)];
    for method in Method::ALL {
        out.push(gradient_check(seed, method)?);
    }
    Ok(out)
}
