//! Library results checked against independent reference computations.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gausspsl::diffcore::{adam_step, MlpSpec, OptimState, OutputActivation, ParameterStore};
use gausspsl::gaussian_partition::{build_rotation, AdcConfig, GaussianSubspace, Partition, SplitThreshold};
use gausspsl::metrics::{filter_nondominated, hypervolume, lhd_with_reference_hv, HvConfig};
use gausspsl::problems::{ideal_and_nadir, reference_front, ProblemId, ProblemSpec};
use gausspsl::psl_model::{vanilla_parameter_count, vanilla_width_for};
use gausspsl::scalarize::{cosmos, linear, modified_tchebycheff, sample_preferences, tchebycheff};

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

#[test]
fn mlp_matches_matmul() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let spec = MlpSpec::new(vec![3, 8, 2], OutputActivation::Identity).unwrap();
    let mut store = ParameterStore::new();
    spec.init_params(&mut store, "net", &mut rng).unwrap();
    for b in ["net.b0", "net.b1"] {
        for v in store.values_mut(b).unwrap() {
            *v = rng.random_range(-0.5..0.5);
        }
    }
    let w0 = store.values("net.w0").unwrap().to_vec();
    let b0 = store.values("net.b0").unwrap().to_vec();
    let w1 = store.values("net.w1").unwrap().to_vec();
    let b1 = store.values("net.b1").unwrap().to_vec();
    for _ in 0..20 {
        let x: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut hidden = [0.0; 8];
        for r in 0..8 {
            let mut acc = b0[r];
            for c in 0..3 {
                acc += w0[r * 3 + c] * x[c];
            }
            hidden[r] = acc.max(0.0);
        }
        let mut expect = [0.0; 2];
        for r in 0..2 {
            expect[r] = b1[r];
            for c in 0..8 {
                expect[r] += w1[r * 8 + c] * hidden[c];
            }
        }
        let got = spec.forward(&store, "net", &x).unwrap();
        for (g, e) in got.iter().zip(expect) {
            assert!((g - e).abs() < 1e-12, "{g} vs {e}");
        }
    }
}

#[test]
fn adam_first_step_moves_by_learning_rate() {
    let mut store = ParameterStore::new();
    store.insert("p".to_string(), vec![1], vec![0.5]).unwrap();
    store.grad_mut("p").unwrap()[0] = 1.0;
    let mut state = OptimState::new(1e-3);
    adam_step(&mut store, &mut state).unwrap();
    // m̂ = 1, v̂ = 1, so the step is lr / (1 + eps)
    let expect = 0.5 - 1e-3 / (1.0 + 1e-8);
    assert!((store.values("p").unwrap()[0] - expect).abs() < 1e-15);
}

#[test]
fn dirichlet_moments() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 100_000;
    let two = sample_preferences(2, n, &mut rng).unwrap();
    let mean1 = two.iter().map(|p| p.as_slice()[0]).sum::<f64>() / n as f64;
    assert!((mean1 - 0.5).abs() < 0.01, "mean {mean1}");

    let three = sample_preferences(3, n, &mut rng).unwrap();
    let mean: Vec<f64> = (0..3)
        .map(|i| three.iter().map(|p| p.as_slice()[i]).sum::<f64>() / n as f64)
        .collect();
    // Dirichlet(1,1,1): var = 2/36, cov = -1/36
    for i in 0..3 {
        for j in 0..3 {
            let c = three
                .iter()
                .map(|p| (p.as_slice()[i] - mean[i]) * (p.as_slice()[j] - mean[j]))
                .sum::<f64>()
                / (n - 1) as f64;
            let expect = if i == j { 2.0 / 36.0 } else { -1.0 / 36.0 };
            assert!(((c - expect) / expect).abs() < 0.05, "cov[{i}][{j}] = {c}");
        }
    }
}

#[test]
fn scalarizer_hand_cases() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let y: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..3.0)).collect();
        let l: Vec<f64> = (0..3).map(|_| rng.random::<f64>()).collect();
        let z: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..0.0)).collect();
        let dot = y[0] * l[0] + y[1] * l[1] + y[2] * l[2];
        assert!((linear(&y, &l) - dot).abs() < 1e-12);
        let brute = (0..3)
            .map(|i| l[i] * (y[i] - z[i]))
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(tchebycheff(&y, &l, &z), brute);
    }
    assert_eq!(
        modified_tchebycheff(&[1.0, 2.0], &[0.5, 0.5], &[0.0, 0.0], 1e-6),
        4.0
    );
    assert_eq!(cosmos(&[1.0, 0.0], &[1.0, 0.0], 1.0), 0.0);
}

#[test]
fn benchmark_hand_evaluations() {
    let zdt3 = ProblemSpec::new(ProblemId::Zdt3);
    assert_eq!(zdt3.evaluate(&[0.0; 10]).unwrap(), vec![0.0, 1.0]);
    let mut x = [0.0; 10];
    x[0] = 1.0;
    let f = zdt3.evaluate(&x).unwrap();
    assert_eq!(f[0], 1.0);
    assert!(f[1].abs() < 1e-14);

    let dtlz7 = ProblemSpec::new(ProblemId::Dtlz7);
    assert_eq!(dtlz7.evaluate(&[0.0; 10]).unwrap(), vec![0.0, 0.0, 6.0]);
}

#[test]
fn benchmark_bounds() {
    let unit = (vec![0.0; 10], vec![1.0; 10]);
    for id in [ProblemId::Zdt3, ProblemId::Dtlz5, ProblemId::Dtlz7] {
        let p = ProblemSpec::new(id);
        assert_eq!((p.lower.clone(), p.upper.clone()), unit, "{id}");
    }
    let re21 = ProblemSpec::new(ProblemId::Re21);
    assert_eq!(re21.lower, vec![1.0, SQRT_2, SQRT_2, 1.0]);
    assert_eq!(re21.upper, vec![3.0; 4]);
    assert!(re21.evaluate(&[0.5, 2.0, 2.0, 2.0]).is_err());
}

/// Reference values from a separate scripted transcription of the RE
/// formulas, evaluated outside this crate.
#[test]
fn re_corner_values() {
    let cases: [(ProblemId, [f64; 4], &[f64]); 9] = [
        (
            ProblemId::Re21,
            [1.0, SQRT_2, SQRT_2, 1.0],
            &[1237.8414230005442, 0.04],
        ),
        (
            ProblemId::Re21,
            [3.0; 4],
            &[2994.9382989376327, 0.013333333333333332],
        ),
        (
            ProblemId::Re21,
            [1.0, 3.0, SQRT_2, 3.0],
            &[2086.3695604244012, 0.016094757082487303],
        ),
        (ProblemId::Re36, [12.0; 4], &[5.931, 12.0, 0.35572067522723994]),
        (ProblemId::Re36, [60.0; 4], &[5.931, 60.0, 0.35572067522723994]),
        (
            ProblemId::Re36,
            [12.0, 12.0, 60.0, 60.0],
            &[18.069, 60.0, 2.1069831193190014],
        ),
        (ProblemId::Re37, [0.0; 4], &[0.692, 0.153, 0.37]),
        (ProblemId::Re37, [1.0; 4], &[0.20514, 0.8774, 0.2838]),
        (ProblemId::Re37, [1.0, 0.0, 1.0, 0.0], &[0.9463, 0.194, -0.161]),
    ];
    for (id, x, expect) in cases {
        let got = ProblemSpec::new(id).evaluate_raw(&x);
        for (g, e) in got.iter().zip(expect) {
            assert!(close(*g, *e, 1e-12), "{id} at {x:?}: {got:?} vs {expect:?}");
        }
    }
}

const ZDT3_PIECES: [(f64, f64); 5] = [
    (0.0, 0.0830015349),
    (0.1822287280, 0.2577623634),
    (0.4093136748, 0.4538821041),
    (0.6183967944, 0.6525117038),
    (0.8233317983, 0.8518328654),
];

#[test]
fn zdt3_front_lies_on_known_pieces() {
    let p = ProblemSpec::new(ProblemId::Zdt3);
    let front = reference_front(&p, 500).unwrap().points;
    assert!(front.len() >= 100);
    for q in &front {
        let f1 = q[0];
        let curve = 1.0 - f1.sqrt() - f1 * (10.0 * PI * f1).sin();
        assert!((q[1] - curve).abs() < 1e-12);
        assert!(
            ZDT3_PIECES.iter().any(|&(a, b)| f1 >= a - 1e-3 && f1 <= b + 1e-3),
            "f1 = {f1} outside the front pieces"
        );
    }
    for piece in ZDT3_PIECES {
        assert!(front
            .iter()
            .any(|q| q[0] >= piece.0 - 1e-3 && q[0] <= piece.1 + 1e-3));
    }
    assert_eq!(filter_nondominated(&front).len(), front.len());
}

#[test]
fn dtlz5_front_on_unit_sphere() {
    let front = reference_front(&ProblemSpec::new(ProblemId::Dtlz5), 300)
        .unwrap()
        .points;
    for q in &front {
        let r: f64 = q.iter().map(|v| v * v).sum();
        assert!((r - 1.0).abs() < 1e-9);
    }
    // optimal decisions reach the same curve
    let p = ProblemSpec::new(ProblemId::Dtlz5);
    let mut x = [0.5; 10];
    x[0] = 0.3;
    x[1] = 0.9;
    let f = p.evaluate(&x).unwrap();
    let r: f64 = f.iter().map(|v| v * v).sum();
    assert!((r - 1.0).abs() < 1e-12);
    assert!((f[2] - (0.3 * FRAC_PI_2).sin()).abs() < 1e-12);
}

#[test]
fn dtlz7_ideal_nadir_brute_force() {
    let front = reference_front(&ProblemSpec::new(ProblemId::Dtlz7), 400)
        .unwrap()
        .points;
    let (ideal, nadir) = ideal_and_nadir(&front).unwrap();
    for d in 0..3 {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for q in &front {
            lo = lo.min(q[d]);
            hi = hi.max(q[d]);
        }
        assert_eq!((ideal[d], nadir[d]), (lo, hi));
    }
}

#[test]
fn re_fronts_are_roughly_unit_scaled() {
    for id in [ProblemId::Re21, ProblemId::Re36, ProblemId::Re37] {
        let front = reference_front(&ProblemSpec::new(id), 200).unwrap().points;
        assert!(front.len() >= 10, "{id:?}: {} points", front.len());
        let (ideal, nadir) = ideal_and_nadir(&front).unwrap();
        for d in 0..ideal.len() {
            assert!(
                ideal[d] > -0.05 && nadir[d] < 1.05,
                "{id:?} objective {d}: [{}, {}]",
                ideal[d],
                nadir[d]
            );
        }
    }
}

#[test]
fn hypervolume_hand_case_and_lhd() {
    let front = [vec![0.0, 1.0], vec![0.5, 0.5], vec![1.0, 0.0]];
    assert_eq!(hypervolume(&front, &[2.0, 2.0]).unwrap(), 3.25);
    let cfg = HvConfig {
        reference: vec![2.0, 2.0],
        epsilon: 1e-6,
    };
    let predicted = [vec![0.0, 1.0], vec![1.0, 0.0]];
    assert_eq!(hypervolume(&predicted, &cfg.reference).unwrap(), 3.0);
    let l = lhd_with_reference_hv(&predicted, 3.25, &cfg).unwrap();
    assert!((l.value - 0.250001f64.ln()).abs() < 1e-12);
    assert!((l.value + 1.3863).abs() < 1e-4);
    assert!(!l.guard_tripped);
}

#[test]
fn rotation_quarter_turn() {
    let r = build_rotation(&[FRAC_PI_2], 2).unwrap();
    let expect = [[0.0, 1.0], [-1.0, 0.0]];
    for i in 0..2 {
        for j in 0..2 {
            assert!((r[(i, j)] - expect[i][j]).abs() < 1e-15);
        }
    }
    assert!(build_rotation(&[0.0; 2], 3).is_err());
    assert!(build_rotation(&[0.0; 6], 4).is_ok());
}

#[test]
fn density_hand_case() {
    // Σ = I, opacity → 1, ‖p − μ‖² = 2
    let mut g = GaussianSubspace::new(0, 0, vec![0.0, 0.0], 1.0, 0.5).unwrap();
    g.opacity_logit = 50.0;
    let d = g.density(&[1.0, 1.0]).unwrap();
    assert!((d - (-1.0f64).exp()).abs() < 1e-12);
}

#[test]
fn weights_match_normalized_densities() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let part = Partition::initialize(3, AdcConfig::default(), &mut rng).unwrap();
    for _ in 0..20 {
        let p: Vec<f64> = (0..3).map(|_| rng.random::<f64>()).collect();
        let dens: Vec<f64> = part.subspaces().iter().map(|g| g.density(&p).unwrap()).collect();
        let total: f64 = dens.iter().sum();
        let w = part.weights(&p).unwrap();
        for (a, b) in w.iter().zip(&dens) {
            assert!((a - b / total).abs() < 1e-12);
        }
    }
}

#[test]
fn split_of_lone_subspace() {
    let cfg = AdcConfig {
        start: 0,
        split_threshold: SplitThreshold::Fixed(0.1),
        initial_count: 1,
        ..AdcConfig::default()
    };
    let parent = GaussianSubspace::new(0, 0, vec![0.5, 0.5], 0.4, 0.9).unwrap();
    let mut part = Partition::from_subspaces(vec![parent.clone()], cfg).unwrap();
    part.accumulate_grad_stats(&[(0, 1.0)]);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (outcome, census) = part.adaptive_density_control(100, &mut rng).unwrap();
    assert_eq!(part.len(), 2);
    assert_eq!(census.split, 1);
    assert_eq!(outcome.removed, vec![0]);
    for g in part.subspaces() {
        for (c, p) in g.scales().iter().zip(parent.scales()) {
            assert!((c - p / 1.6).abs() < 1e-12);
        }
    }
}

#[test]
fn vanilla_width_matches_target() {
    for depth in [3, 4] {
        for target in [2_000, 7_000, 26_000] {
            let (w, count) = vanilla_width_for(depth, 3, 10, target).unwrap();
            assert_eq!(count, vanilla_parameter_count(depth, 3, 10, w));
            assert!((count as f64 - target as f64).abs() <= 0.05 * target as f64);
        }
    }
    // closed form: (3+1)·w + (w+1)·w + (w+1)·10
    assert_eq!(vanilla_parameter_count(3, 3, 10, 20), 4 * 20 + 21 * 20 + 21 * 10);
}
