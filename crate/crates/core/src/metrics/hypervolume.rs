use std::collections::BTreeMap;

use ordered_float::OrderedFloat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dominance::filter_nondominated;
use super::MetricsError;

/// Reference point and log guard for hypervolume comparisons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HvConfig {
    pub reference: Vec<f64>,
    pub epsilon: f64,
}

impl HvConfig {
    pub fn new(reference: Vec<f64>) -> Self {
        Self {
            reference,
            epsilon: 1e-6,
        }
    }

    /// Reference point `nadir + margin · (nadir − ideal)`.
    pub fn with_margin(ideal: &[f64], nadir: &[f64], margin: f64) -> Self {
        Self::new(
            ideal
                .iter()
                .zip(nadir)
                .map(|(&lo, &hi)| hi + margin * (hi - lo))
                .collect(),
        )
    }
}

/// Points strictly inside the reference box. Points on or beyond the
/// reference contribute nothing and are dropped rather than clamped.
pub fn clip_to_reference(points: &[Vec<f64>], reference: &[f64]) -> Vec<Vec<f64>> {
    points
        .iter()
        .filter(|p| p.iter().zip(reference).all(|(y, r)| y < r))
        .cloned()
        .collect()
}

fn check_dims(points: &[Vec<f64>], reference: &[f64]) -> Result<(), MetricsError> {
    let k = reference.len();
    if !(k == 2 || k == 3) {
        return Err(MetricsError::Unsupported(k));
    }
    if let Some(p) = points.iter().find(|p| p.len() != k) {
        return Err(MetricsError::InvalidArgument(format!(
            "point of dimension {} against a {k}-dimensional reference",
            p.len()
        )));
    }
    if points.iter().flatten().any(|v| !v.is_finite()) {
        return Err(MetricsError::InvalidArgument("non-finite objective".into()));
    }
    Ok(())
}

/// Area dominated by a 2-D staircase keyed by f1 with strictly decreasing f2.
fn staircase_area(stairs: &BTreeMap<OrderedFloat<f64>, f64>, r: [f64; 2]) -> f64 {
    let mut area = 0.0;
    let mut it = stairs.iter().peekable();
    while let Some((x, y)) = it.next() {
        let next_x = it.peek().map_or(r[0], |(nx, _)| nx.0);
        area += (next_x - x.0) * (r[1] - y);
    }
    area
}

/// Inserts `(x, y)` into a staircase; returns false when it is weakly dominated.
fn staircase_insert(stairs: &mut BTreeMap<OrderedFloat<f64>, f64>, x: f64, y: f64) -> bool {
    let key = OrderedFloat(x);
    if let Some((_, &py)) = stairs.range(..=key).next_back() {
        if py <= y {
            return false;
        }
    }
    let covered: Vec<_> = stairs
        .range(key..)
        .take_while(|(_, &qy)| qy >= y)
        .map(|(k, _)| *k)
        .collect();
    for k in covered {
        stairs.remove(&k);
    }
    stairs.insert(key, y);
    true
}

/// Exact hypervolume for two or three objectives.
///
/// 2-D is a sorted sweep. 3-D sweeps the third objective upwards while
/// maintaining the 2-D staircase of the points seen so far; each slab adds
/// its cross-section area times its thickness.
pub fn hypervolume(points: &[Vec<f64>], reference: &[f64]) -> Result<f64, MetricsError> {
    check_dims(points, reference)?;
    let pts = filter_nondominated(&clip_to_reference(points, reference));
    if pts.is_empty() {
        return Ok(0.0);
    }
    if reference.len() == 2 {
        let mut stairs = BTreeMap::new();
        for p in &pts {
            staircase_insert(&mut stairs, p[0], p[1]);
        }
        return Ok(staircase_area(&stairs, [reference[0], reference[1]]));
    }

    let mut by_z = pts;
    by_z.sort_by(|a, b| a[2].total_cmp(&b[2]));
    let r2 = [reference[0], reference[1]];
    let mut stairs = BTreeMap::new();
    let mut area = 0.0;
    let mut volume = 0.0;
    for (i, p) in by_z.iter().enumerate() {
        if staircase_insert(&mut stairs, p[0], p[1]) {
            area = staircase_area(&stairs, r2);
        }
        let top = by_z.get(i + 1).map_or(reference[2], |q| q[2]);
        volume += area * (top - p[2]);
    }
    Ok(volume)
}

/// Monte-Carlo estimate of the hypervolume with its binomial standard error.
///
/// Samples uniformly in the box spanned by the componentwise minimum of the
/// clipped points and the reference point.
pub fn hv_monte_carlo(
    points: &[Vec<f64>],
    reference: &[f64],
    samples: usize,
    seed: u64,
) -> Result<(f64, f64), MetricsError> {
    if samples < 10_000 {
        return Err(MetricsError::InvalidArgument(format!(
            "Monte-Carlo hypervolume needs at least 1e4 samples, got {samples}"
        )));
    }
    let k = reference.len();
    if points.iter().any(|p| p.len() != k) {
        return Err(MetricsError::InvalidArgument("dimension mismatch".into()));
    }
    let pts = clip_to_reference(points, reference);
    if pts.is_empty() {
        return Ok((0.0, 0.0));
    }
    let lo: Vec<f64> = (0..k)
        .map(|d| pts.iter().map(|p| p[d]).fold(f64::INFINITY, f64::min))
        .collect();
    let box_volume: f64 = lo.iter().zip(reference).map(|(l, r)| r - l).product();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sample = vec![0.0; k];
    let mut hits = 0usize;
    for _ in 0..samples {
        for d in 0..k {
            sample[d] = lo[d] + rng.random::<f64>() * (reference[d] - lo[d]);
        }
        if pts.iter().any(|p| p.iter().zip(&sample).all(|(y, s)| y <= s)) {
            hits += 1;
        }
    }
    let frac = hits as f64 / samples as f64;
    let se = box_volume * (frac * (1.0 - frac) / samples as f64).sqrt();
    Ok((box_volume * frac, se))
}

/// Outcome of a log hypervolume difference evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lhd {
    pub value: f64,
    /// The predicted front exceeded the reference front by more than the
    /// guard, so `value` is `ln(ε)`.
    pub guard_tripped: bool,
}

/// `ln(HV(Y*) + ε − HV(Ŷ))`; both fronts share `cfg.reference`.
pub fn lhd(
    predicted: &[Vec<f64>],
    reference_front: &[Vec<f64>],
    cfg: &HvConfig,
) -> Result<Lhd, MetricsError> {
    let hv_star = hypervolume(reference_front, &cfg.reference)?;
    lhd_with_reference_hv(predicted, hv_star, cfg)
}

/// As [`lhd`] with `HV(Y*)` precomputed.
pub fn lhd_with_reference_hv(
    predicted: &[Vec<f64>],
    hv_star: f64,
    cfg: &HvConfig,
) -> Result<Lhd, MetricsError> {
    if !(cfg.epsilon > 0.0) {
        return Err(MetricsError::InvalidArgument("epsilon must be positive".into()));
    }
    let hv_hat = hypervolume(predicted, &cfg.reference)?;
    let arg = hv_star + cfg.epsilon - hv_hat;
    Ok(if arg > 0.0 {
        Lhd {
            value: arg.ln(),
            guard_tripped: false,
        }
    } else {
        Lhd {
            value: cfg.epsilon.ln(),
            guard_tripped: true,
        }
    })
}
