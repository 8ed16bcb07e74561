//! Objective formulas of the benchmark problems, generic over [`Real`] so the
//! same expressions serve plain evaluation and gradient recording.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::diffcore::{sum_of, Real};

/// ZDT3, two objectives, `x ∈ [0,1]^n`.
pub fn zdt3<T: Real>(x: &[T]) -> Vec<T> {
    let n = x.len();
    let f1 = x[0];
    let g = sum_of(&x[1..]) * (9.0 / (n - 1) as f64) + 1.0;
    let r = f1 / g;
    let h = -r.sqrt() - r * (f1 * (10.0 * PI)).sin() + 1.0;
    vec![f1, g * h]
}

/// DTLZ5 with three objectives, `x ∈ [0,1]^n`.
pub fn dtlz5<T: Real>(x: &[T]) -> Vec<T> {
    const M: usize = 3;
    let tail: Vec<T> = x[M - 1..].iter().map(|&v| (v - 0.5).square()).collect();
    let g = sum_of(&tail);
    let theta1 = x[0] * FRAC_PI_2;
    // θ_2 = π / (4(1+g)) · (1 + 2 g x_2)
    let theta2 = (g * x[1] * 2.0 + 1.0) / (g + 1.0) * (PI / 4.0);
    let r = g + 1.0;
    vec![
        r * theta1.cos() * theta2.cos(),
        r * theta1.cos() * theta2.sin(),
        r * theta1.sin(),
    ]
}

/// DTLZ7 with three objectives, `x ∈ [0,1]^n`.
pub fn dtlz7<T: Real>(x: &[T]) -> Vec<T> {
    const M: usize = 3;
    let tail = &x[M - 1..];
    let g = sum_of(tail) * (9.0 / tail.len() as f64) + 1.0;
    let gp1 = g + 1.0;
    let terms: Vec<T> = x[..M - 1]
        .iter()
        .map(|&f| f / gp1 * ((f * (3.0 * PI)).sin() + 1.0))
        .collect();
    let h = -sum_of(&terms) + M as f64;
    vec![x[0], x[1], gp1 * h]
}

/// RE21, four-bar truss design. Raw (unnormalised) objectives.
pub fn re21<T: Real>(x: &[T]) -> Vec<T> {
    const F: f64 = 10.0;
    const E: f64 = 2.0e5;
    const L: f64 = 200.0;
    let s2 = 2.0f64.sqrt();
    let (x1, x2, x3, x4) = (x[0], x[1], x[2], x[3]);
    let f1 = (x1 * 2.0 + x2 * s2 + x3.sqrt() + x4) * L;
    // 2/x1 + 2√2/x2 − 2√2/x3 + 2/x4
    let inv = |v: T| (v * 0.0 + 1.0) / v;
    let f2 = (inv(x1) * 2.0 + inv(x2) * (2.0 * s2) - inv(x3) * (2.0 * s2) + inv(x4) * 2.0) * (F * L / E);
    vec![f1, f2]
}

/// RE36, gear train design, with the integer rounding of the decision
/// variables relaxed to the continuum. Raw objectives.
pub fn re36<T: Real>(x: &[T]) -> Vec<T> {
    let (x1, x2, x3, x4) = (x[0], x[1], x[2], x[3]);
    let ratio = (x3 / x1) * (x4 / x2);
    let f1 = (-ratio + 6.931).abs();
    let f2 = x1.maximum(x2).maximum(x3).maximum(x4);
    // constraint violation of 0.5 − f1/6.931 ≥ 0
    let zero = f1 * 0.0;
    let f3 = (f1 / 6.931 - 0.5).maximum(zero);
    vec![f1, f2, f3]
}

/// RE37, rocket injector design. Raw objectives.
pub fn re37<T: Real>(x: &[T]) -> Vec<T> {
    let (a, ha, oa, optt) = (x[0], x[1], x[2], x[3]);
    let f1 = a * 0.477 - ha * 0.687 - oa * 0.080 - optt * 0.0650 - a * a * 0.167 - ha * a * 0.0129
        + ha * ha * 0.0796
        - oa * a * 0.0634
        - oa * ha * 0.0257
        + oa * oa * 0.0877
        - optt * a * 0.0521
        + optt * ha * 0.00156
        + optt * oa * 0.00198
        + optt * optt * 0.0184
        + 0.692;
    let f2 = -a * 0.322 + ha * 0.396 + oa * 0.424 + optt * 0.0226 + a * a * 0.175 + ha * a * 0.0185
        - ha * ha * 0.0701
        - oa * a * 0.251
        + oa * ha * 0.179
        + oa * oa * 0.0150
        + optt * a * 0.0134
        + optt * ha * 0.0296
        + optt * oa * 0.0752
        + optt * optt * 0.0192
        + 0.153;
    let f3 = -a * 0.205 + ha * 0.0307 + oa * 0.108 + optt * 1.019 - a * a * 0.135
        + ha * a * 0.0141
        + ha * ha * 0.0998
        + oa * a * 0.208
        - oa * ha * 0.0301
        - oa * oa * 0.226
        + optt * a * 0.353
        - optt * oa * 0.0497
        - optt * optt * 0.423
        + ha * a * a * 0.202
        - oa * a * a * 0.281
        - ha * ha * a * 0.342
        - ha * ha * oa * 0.245
        + oa * oa * ha * 0.281
        - optt * optt * a * 0.184
        - ha * a * oa * 0.281
        + 0.370;
    vec![f1, f2, f3]
}
