use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gausspsl::gaussian_partition::{
    angle_count, build_rotation, entropy, AdcConfig, GaussianSubspace, Partition,
};
use gausspsl::metrics::{dominates, filter_nondominated, hypervolume};
use gausspsl::problems::{reference_front, ProblemId, ProblemSpec};
use gausspsl::psl_model::{predict, GaussianPslModel, ModelError, ParetoSetModel, TrainConfig, Trainer};
use gausspsl::scalarize::{flat_dirichlet, linear, modified_tchebycheff, tchebycheff};

fn simplex(k: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, k).prop_map(|v| {
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect()
    })
}

fn subspace(k: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>, f64)> {
    (
        simplex(k),
        prop::collection::vec(-3.0f64..3.0, angle_count(k)),
        prop::collection::vec(-4.0f64..1.0, k),
        -6.0f64..6.0,
    )
}

fn partition(k: usize) -> impl Strategy<Value = Partition> {
    prop::collection::vec(subspace(k), 1..8).prop_map(move |raw| {
        let subs = raw
            .into_iter()
            .enumerate()
            .map(|(id, (center, angles, log_scales, alpha))| {
                let mut g = GaussianSubspace::new(id as u64, 0, center, 0.3, 0.5).unwrap();
                g.angles = angles;
                g.log_scales = log_scales;
                g.opacity_logit = alpha;
                g
            })
            .collect();
        Partition::from_subspaces(subs, AdcConfig::default()).unwrap()
    })
}

fn points(k: usize, max: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(0.0f64..1.0, k), 1..max)
}

fn sorted(mut v: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v.dedup();
    v
}

proptest! {
    #[test]
    fn weights_on_simplex_entropy_bounded((part, pref) in (2usize..5).prop_flat_map(|k| (partition(k), simplex(k)))) {
        let w = part.weights(&pref).unwrap();
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(w.iter().all(|&x| x >= 0.0));
        let h = entropy(&w);
        prop_assert!(h >= 0.0 && h <= (part.len() as f64).ln() + 1e-12);
    }

    #[test]
    fn rotation_is_orthonormal(angles in prop::collection::vec(-10.0f64..10.0, 10)) {
        for m in 2..=5 {
            let r = build_rotation(&angles[..angle_count(m)], m).unwrap();
            let e = &r * r.transpose() - nalgebra::DMatrix::<f64>::identity(m, m);
            prop_assert!(e.amax() < 1e-9);
            prop_assert!((r.determinant() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn filter_matches_brute_force_and_is_idempotent(pts in (2usize..4).prop_flat_map(|k| points(k, 120))) {
        let fast = filter_nondominated(&pts);
        let brute: Vec<Vec<f64>> = pts
            .iter()
            .filter(|p| !pts.iter().any(|q| dominates(q, p)))
            .cloned()
            .collect();
        prop_assert_eq!(sorted(fast.clone()), sorted(brute));
        prop_assert_eq!(sorted(filter_nondominated(&fast)), sorted(fast));
    }

    #[test]
    fn hypervolume_monotone_and_translation_covariant(
        (pts, extra, shift) in (2usize..4).prop_flat_map(|k| (
            points(k, 30),
            prop::collection::vec(0.0f64..1.0, k),
            prop::collection::vec(-5.0f64..5.0, k),
        ))
    ) {
        let k = extra.len();
        let r = vec![1.2; k];
        let base = hypervolume(&pts, &r).unwrap();
        let mut more = pts.clone();
        more.push(extra.clone());
        prop_assert!(hypervolume(&more, &r).unwrap() >= base - 1e-12);

        // a point dominated by an existing one changes nothing
        let dominated: Vec<f64> = pts[0].iter().map(|v| v + 0.05).collect();
        let mut with_dominated = pts.clone();
        with_dominated.push(dominated);
        prop_assert!((hypervolume(&with_dominated, &r).unwrap() - base).abs() <= 1e-12);

        let moved: Vec<Vec<f64>> = pts
            .iter()
            .map(|p| p.iter().zip(&shift).map(|(a, s)| a + s).collect())
            .collect();
        let moved_r: Vec<f64> = r.iter().zip(&shift).map(|(a, s)| a + s).collect();
        prop_assert!((hypervolume(&moved, &moved_r).unwrap() - base).abs() <= 1e-9);
    }

    #[test]
    fn chebyshev_forms_are_monotone(
        (y, dy, pref, z) in (2usize..5).prop_flat_map(|k| (
            prop::collection::vec(-2.0f64..2.0, k),
            prop::collection::vec(0.0f64..1.0, k),
            simplex(k),
            prop::collection::vec(-3.0f64..-2.0, k),
        ))
    ) {
        let lower: Vec<f64> = y.iter().zip(&dy).map(|(a, d)| a - d).collect();
        prop_assert!(tchebycheff(&lower, &pref, &z) <= tchebycheff(&y, &pref, &z));
        prop_assert!(
            modified_tchebycheff(&lower, &pref, &z, 1e-6) <= modified_tchebycheff(&y, &pref, &z, 1e-6)
        );
    }

    #[test]
    fn linear_is_positively_homogeneous(
        y in prop::collection::vec(-5.0f64..5.0, 3),
        pref in simplex(3),
        c in 0.01f64..100.0,
    ) {
        let scaled: Vec<f64> = y.iter().map(|v| v * c).collect();
        let lhs = linear(&scaled, &pref);
        let rhs = c * linear(&y, &pref);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1.0));
    }

    #[test]
    fn evaluate_is_pure(x in prop::collection::vec(0.0f64..1.0, 10)) {
        for id in [ProblemId::Zdt3, ProblemId::Dtlz5, ProblemId::Dtlz7] {
            let p = ProblemSpec::new(id);
            let first = p.evaluate(&x).unwrap();
            for _ in 0..20 {
                prop_assert_eq!(&p.evaluate(&x).unwrap(), &first);
            }
        }
    }
}

#[test]
fn repeated_evaluation_identical() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for id in ProblemId::ALL {
        let p = ProblemSpec::new(id);
        let x: Vec<f64> = p
            .lower
            .iter()
            .zip(&p.upper)
            .map(|(l, u)| rng.random_range(*l..*u))
            .collect();
        let first = p.evaluate(&x).unwrap();
        assert!((0..1000).all(|_| p.evaluate(&x).unwrap() == first), "{id}");
    }
}

#[test]
fn reference_fronts_survive_refiltering() {
    for id in [ProblemId::Zdt3, ProblemId::Dtlz5, ProblemId::Dtlz7] {
        let f = reference_front(&ProblemSpec::new(id), 300).unwrap().points;
        assert_eq!(filter_nondominated(&f).len(), f.len(), "{id}");
    }
}

#[test]
fn random_decisions_never_dominate_analytic_fronts() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for id in [ProblemId::Zdt3, ProblemId::Dtlz5, ProblemId::Dtlz7] {
        let p = ProblemSpec::new(id);
        let front = reference_front(&p, 200).unwrap().points;
        for _ in 0..100_000 / 3 {
            let x: Vec<f64> = (0..p.n).map(|_| rng.random::<f64>()).collect();
            let y = p.evaluate(&x).unwrap();
            // tolerance for the front's own floating-point rounding
            let nudged: Vec<f64> = y.iter().map(|v| v + 1e-9).collect();
            assert!(
                !front.iter().any(|q| dominates(&nudged, q)),
                "{id}: {y:?} dominates the reference front"
            );
        }
    }
}

#[test]
fn ls_argmin_on_re21_is_nondominated() {
    let p = ProblemSpec::new(ProblemId::Re21);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let sample: Vec<Vec<f64>> = (0..20_000)
        .map(|_| {
            let x: Vec<f64> = p
                .lower
                .iter()
                .zip(&p.upper)
                .map(|(l, u)| rng.random_range(*l..=*u))
                .collect();
            p.evaluate(&x).unwrap()
        })
        .collect();
    let front = filter_nondominated(&sample);
    for i in 0..=50 {
        let a = i as f64 / 50.0;
        let pref = [a, 1.0 - a];
        let best = sample
            .iter()
            .min_by(|u, v| linear(u, &pref).total_cmp(&linear(v, &pref)))
            .unwrap();
        assert!(
            front.contains(best) || pref.contains(&0.0),
            "argmin at {pref:?} is dominated"
        );
    }
}

#[test]
fn adc_with_triggers_off_is_identity() {
    let cfg = AdcConfig {
        start: 0,
        grad_floor: f64::INFINITY,
        grad_factor: f64::INFINITY,
        prune_opacity: 0.0,
        ..AdcConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut part = Partition::initialize(3, cfg, &mut rng).unwrap();
    let before = part.clone();
    for it in 1..=20 {
        let norms: Vec<(u64, f64)> = part
            .ids()
            .into_iter()
            .map(|id| (id, rng.random::<f64>() * 1e3))
            .collect();
        part.accumulate_grad_stats(&norms);
        part.adaptive_density_control(it * 100, &mut rng).unwrap();
    }
    assert_eq!(part.subspaces(), before.subspaces());
}

#[test]
fn densification_fires_on_dtlz7() {
    let p = ProblemSpec::new(ProblemId::Dtlz7);
    let mut config = TrainConfig {
        iterations: 1000,
        ..TrainConfig::default()
    };
    config.adc.initial_count = 1;
    let mut t = Trainer::new(&p, config).unwrap();
    for _ in 0..1000 {
        t.step().unwrap();
    }
    let grew = t.census().windows(2).any(|w| w[1].total > w[0].total)
        || t.census().first().is_some_and(|c| c.total > 1);
    assert!(grew, "census: {:?}", t.census());
}

#[test]
fn forward_is_continuous_in_preference() {
    let p = ProblemSpec::new(ProblemId::Dtlz7);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let model = GaussianPslModel::new(&p, AdcConfig::default(), &mut rng).unwrap();
    for _ in 0..100 {
        let pref = flat_dirichlet(3, &mut rng);
        let mut dir: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mean = dir.iter().sum::<f64>() / 3.0;
        dir.iter_mut().for_each(|d| *d -= mean);
        let base = &predict(&model, std::slice::from_ref(&pref)).unwrap()[0];
        let mut last = f64::INFINITY;
        for e in [1e-2, 1e-4, 1e-6, 1e-8] {
            let q: Vec<f64> = pref.iter().zip(&dir).map(|(a, d)| a + e * d).collect();
            let x = &predict(&model, &[q]).unwrap()[0];
            let gap = x.iter().zip(base).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(gap <= last + 1e-15);
            last = gap;
        }
        assert!(last < 1e-6);
    }
}

#[test]
fn training_is_deterministic() {
    let p = ProblemSpec::new(ProblemId::Zdt3);
    let config = TrainConfig {
        iterations: 150,
        seed: 3,
        ..TrainConfig::default()
    };
    let run = || {
        let mut t = Trainer::new(&p, config.clone()).unwrap();
        for _ in 0..150 {
            t.step().unwrap();
        }
        (t.loss_curve().to_vec(), t.model().store().clone())
    };
    let (la, sa) = run();
    let (lb, sb) = run();
    assert_eq!(la, lb);
    assert_eq!(sa, sb);
}

#[test]
fn non_finite_parameter_aborts_training() {
    let p = ProblemSpec::new(ProblemId::Zdt3);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut model = GaussianPslModel::new(&p, AdcConfig::default(), &mut rng).unwrap();
    model.store_mut().values_mut("agg.w0").unwrap()[0] = f64::NAN;
    let mut t = Trainer::with_model(&p, TrainConfig::default(), Box::new(model)).unwrap();
    let err = t.step().unwrap_err();
    assert!(
        matches!(
            err,
            ModelError::NonFiniteLoss { iteration: 1 } | ModelError::Aborted { iteration: 1, .. }
        ),
        "{err}"
    );
}
