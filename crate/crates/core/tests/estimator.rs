use actlearn_core::estimator::{
    build_estimator, estimate_component_average, relative_error_norms, relative_errors,
    ErrorSnapshot, EstimatorError, NormKind,
};
use actlearn_core::grid::{uniform_time_grid, AxisTransform, ParameterSpace};
use actlearn_core::ksnn::{KernelChoice, KernelKind};
use actlearn_core::linalg::Matrix;
use actlearn_core::pod::SnapshotMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn snap(mu: f64, errors: Vec<f64>) -> ErrorSnapshot {
    ErrorSnapshot {
        parameter: vec![mu],
        errors,
        norm_kind: NormKind::L2,
    }
}

fn mq(eps: f64) -> KernelChoice {
    KernelChoice {
        kind: KernelKind::Multiquadric,
        shape_factor: Some(eps),
    }
}

#[test]
fn relative_error_examples() {
    let t = uniform_time_grid(1.0, 1);
    let truth = SnapshotMatrix::new(
        Matrix::from_row_slice(2, 2, &[1.0, 3.0, 0.0, 4.0]).unwrap(),
        t,
        vec![0.1],
        "u",
    )
    .unwrap();
    let same = relative_error_norms(&truth, truth.data(), NormKind::L2).unwrap();
    assert_eq!(same.errors, vec![0.0, 0.0]);
    let zero = relative_error_norms(&truth, &Matrix::zeros(2, 2), NormKind::L2).unwrap();
    assert_eq!(zero.errors[0], 1.0);
    assert!((zero.errors[1] - 1.0).abs() < 1e-15);
    assert!(matches!(
        relative_errors(truth.data(), &Matrix::zeros(3, 2), NormKind::L2),
        Err(EstimatorError::DimensionMismatch { .. })
    ));
}

#[test]
fn relative_errors_match_scalar_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let a = Matrix::from_fn(17, 5, |_, _| rng.random_range(-1.0..1.0));
    let b = Matrix::from_fn(17, 5, |_, _| rng.random_range(-1.0..1.0));
    for kind in [NormKind::L1, NormKind::L2, NormKind::Linf] {
        let ours = relative_errors(&a, &b, kind).unwrap();
        for j in 0..5 {
            let (mut num, mut den) = (0.0f64, 0.0f64);
            for i in 0..17 {
                let d = (a[(i, j)] - b[(i, j)]).abs();
                let v = a[(i, j)].abs();
                match kind {
                    NormKind::L1 => {
                        num += d;
                        den += v;
                    }
                    NormKind::L2 => {
                        num += d * d;
                        den += v * v;
                    }
                    NormKind::Linf => {
                        num = num.max(d);
                        den = den.max(v);
                    }
                }
            }
            if kind == NormKind::L2 {
                num = num.sqrt();
                den = den.sqrt();
            }
            let oracle = num / (den + 1e-30);
            assert!((ours[j] - oracle).abs() <= 1e-14 * oracle.max(1.0), "{kind:?} col {j}");
        }
    }
}

#[test]
fn two_center_closed_form() {
    let (a, b) = (3e-3, 2e-2);
    let (xa, xb) = (0.0, 1.0);
    let eps = 0.8;
    let est = build_estimator(
        &[snap(xa, vec![a]), snap(xb, vec![b])],
        &mq(eps),
        &ParameterSpace::identity(),
    )
    .unwrap();
    let phi = |d: f64| ((d / eps).powi(2) + 1.0).sqrt();
    let (p0, pd) = (phi(0.0), phi(1.0));
    let det = p0 * p0 - pd * pd;
    let wa = (p0 * a.ln() - pd * b.ln()) / det;
    let wb = (p0 * b.ln() - pd * a.ln()) / det;
    let mut prev: Option<f64> = None;
    for k in 0..=20 {
        let x = k as f64 / 20.0;
        let oracle = (wa * phi((x - xa).abs()) + wb * phi((x - xb).abs())).exp();
        let got = est.estimate(&[x]).unwrap();
        assert!((got / oracle - 1.0).abs() <= 1e-12, "x = {x}");
        if let Some(p) = prev {
            assert!((got - p).abs() <= 0.25 * b, "jump at x = {x}");
        }
        prev = Some(got);
    }
    assert!((est.estimate(&[xa]).unwrap() / a - 1.0).abs() <= 1e-12);
    assert!((est.estimate(&[xb]).unwrap() / b - 1.0).abs() <= 1e-12);
}

#[test]
fn constant_errors_and_dominating_instance() {
    let snaps: Vec<_> = (0..5).map(|i| snap(i as f64, vec![0.01, 0.01, 0.01])).collect();
    let est = build_estimator(&snaps, &KernelChoice::default(), &ParameterSpace::identity()).unwrap();
    for i in 0..5 {
        assert!((est.estimate(&[i as f64]).unwrap() / 0.01 - 1.0).abs() <= 1e-10);
    }
    let snaps: Vec<_> = (0..4).map(|i| snap(i as f64, vec![1e-6, 0.5, 1e-5])).collect();
    let est = build_estimator(&snaps, &KernelChoice::default(), &ParameterSpace::identity()).unwrap();
    let x = [1.37];
    let per_time = est.per_time(&x).unwrap();
    assert_eq!(est.estimate(&x).unwrap(), per_time[1]);
}

#[test]
fn zero_errors_are_floored() {
    let snaps = vec![snap(0.0, vec![0.0, 1e-3]), snap(1.0, vec![1e-4, 1e-3])];
    let est = build_estimator(&snaps, &mq(1.0), &ParameterSpace::identity()).unwrap();
    let pt = est.per_time(&[0.0]).unwrap();
    assert!((pt[0] / 1e-16 - 1.0).abs() < 1e-8);
    assert!(est.estimate(&[0.5]).unwrap() > 0.0);
}

#[test]
fn estimator_input_validation() {
    assert!(matches!(
        build_estimator(&[snap(0.0, vec![0.1])], &mq(1.0), &ParameterSpace::identity()),
        Err(EstimatorError::TooFewParameters { .. })
    ));
    assert_eq!(
        build_estimator(
            &[snap(0.0, vec![0.1]), snap(1.0, vec![0.1, 0.2])],
            &mq(1.0),
            &ParameterSpace::identity()
        )
        .unwrap_err(),
        EstimatorError::MismatchedTimeCounts
    );
    assert_eq!(
        estimate_component_average(&[], &[0.0]).unwrap_err(),
        EstimatorError::EmptyComponentList
    );
}

#[test]
fn component_average() {
    let space = ParameterSpace::uniform(AxisTransform::Log10, 1);
    let a = build_estimator(
        &[snap(1e-3, vec![0.1, 0.2]), snap(1e-1, vec![0.05, 0.01])],
        &KernelChoice::default(),
        &space,
    )
    .unwrap();
    let b = build_estimator(
        &[snap(1e-3, vec![0.3, 0.02]), snap(1e-1, vec![0.5, 0.001])],
        &KernelChoice::default(),
        &space,
    )
    .unwrap();
    let mu = [3e-2];
    let single = estimate_component_average(std::slice::from_ref(&a), &mu).unwrap();
    assert_eq!(single, a.estimate(&mu).unwrap());
    let avg = estimate_component_average(&[a.clone(), b.clone()], &mu).unwrap();
    assert_eq!(avg, (a.estimate(&mu).unwrap() + b.estimate(&mu).unwrap()) / 2.0);
}

#[test]
fn grid_sweep_argmax_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let snaps: Vec<_> = (0..8)
        .map(|i| snap(i as f64 * 0.3, (0..6).map(|_| 10f64.powf(rng.random_range(-5.0..-1.0))).collect()))
        .collect();
    let est = build_estimator(&snaps, &KernelChoice::default(), &ParameterSpace::identity()).unwrap();
    let cands: Vec<Vec<f64>> = (0..50).map(|k| vec![k as f64 * 0.043 + 0.01]).collect();
    let sweep = est.estimate_many(&cands).unwrap();
    // Oracle: evaluate every per-time network separately and take maxima.
    let net = est.network();
    let mut best = (0usize, f64::NEG_INFINITY);
    for (c, mu) in cands.iter().enumerate() {
        let row = net.kernel_row(mu).unwrap();
        let w = net.weights();
        let mut m: f64 = 0.0;
        for j in 0..6 {
            let log: f64 = row.iter().enumerate().map(|(i, k)| k * w[(i, j)]).sum();
            m = m.max(log.exp());
        }
        assert!((sweep[c] / m - 1.0).abs() <= 1e-12);
        if m > best.1 {
            best = (c, m);
        }
    }
    let ours = sweep
        .iter()
        .enumerate()
        .fold((0usize, f64::NEG_INFINITY), |b, (i, &v)| if v > b.1 { (i, v) } else { b });
    assert_eq!(ours.0, best.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_and_positive(seed in any::<u64>(), count in 2usize..15, times in 1usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let snaps: Vec<_> = (0..count)
            .map(|i| snap(
                10f64.powf(-4.0 + 3.0 * i as f64 / count as f64),
                (0..times).map(|_| 10f64.powf(rng.random_range(-8.0..0.0))).collect(),
            ))
            .collect();
        let space = ParameterSpace::uniform(AxisTransform::Log10, 1);
        let est = build_estimator(&snaps, &KernelChoice::default(), &space).unwrap();
        for s in &snaps {
            let e = est.estimate(&s.parameter).unwrap();
            prop_assert!((e / s.max_error() - 1.0).abs() <= 1e-8);
        }
        for k in 0..40 {
            let mu = 10f64.powf(-4.5 + 4.0 * k as f64 / 39.0);
            prop_assert!(est.estimate(&[mu]).unwrap() > 0.0);
        }
        // Adding a parameter keeps exactness at the earlier ones.
        let mut more = snaps.clone();
        more.push(snap(0.5, vec![1e-3; times]));
        let est2 = build_estimator(&more, &KernelChoice::default(), &space).unwrap();
        for s in &snaps {
            prop_assert!((est2.estimate(&s.parameter).unwrap() / s.max_error() - 1.0).abs() <= 1e-8);
        }
    }
}
