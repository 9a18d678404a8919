use std::cell::Cell;

use actlearn_core::active::{
    enrich_new_parameter, final_energy_criterion, run_offline, select_next, ActiveError,
    ActiveLearningConfig, CandidateEstimate, EnrichmentExit, EnrichmentGuard, Warning,
};
use actlearn_core::estimator::relative_errors;
use actlearn_core::fom::{BurgersConfig, BurgersProvider, FomError, FomProvider};
use actlearn_core::grid::{linspace, log_uniform, uniform_time_grid, AxisTransform, ParameterSpace};
use actlearn_core::ksnn::KernelChoice;
use actlearn_core::linalg::Matrix;
use actlearn_core::pod::{pod_approximation, pod_of_matrix, PodBasis, SnapshotMatrix, Truncation};
use actlearn_core::NormKind;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ce(index: usize, estimate: f64) -> CandidateEstimate {
    CandidateEstimate { index, estimate }
}

fn small_burgers() -> BurgersProvider {
    BurgersProvider::new(BurgersConfig { grid_nodes: 60 }).unwrap()
}

fn small_config(tolerance: f64) -> ActiveLearningConfig {
    ActiveLearningConfig {
        candidate_grid: log_uniform(1.0 / 1500.0, 0.1, 30).into_iter().map(|v| vec![v]).collect(),
        initial_indices: vec![0, 29, 10, 20],
        time_grid: uniform_time_grid(2.0, 30),
        tolerance,
        initial_energy: 1e-3,
        norm_kind: NormKind::L2,
        kernel: KernelChoice::default(),
        time_kernel: KernelChoice::default(),
        parameter_space: ParameterSpace::uniform(AxisTransform::Log10, 1),
        max_iterations: None,
        max_enrichment_steps: None,
        enrichment_guard: EnrichmentGuard::Global,
    }
}

#[test]
fn select_next_examples() {
    let picked = select_next(&[ce(0, 1e-3), ce(1, 5e-2), ce(2, 2e-2)]).unwrap();
    assert_eq!(picked, ce(1, 5e-2));
    assert_eq!(select_next(&[ce(4, 0.1)]).unwrap().index, 4);
    assert_eq!(select_next(&[ce(7, 0.3), ce(3, 0.3)]).unwrap().index, 3);
    assert!(matches!(select_next(&[]), Err(ActiveError::EmptyCandidateSet)));
}

#[test]
fn energy_hat_examples() {
    let b = |e: f64| {
        let sig = [1.0, (e / (1.0 - e)).sqrt()];
        PodBasis::from_parts(Matrix::identity(2), sig.to_vec(), Truncation::Rank(1)).unwrap()
    };
    let (x, y) = (b(0.01), b(0.01));
    assert!((final_energy_criterion(&[&x, &y]) - 0.01).abs() < 1e-15);
    let z = b(1e-5);
    assert_eq!(final_energy_criterion(&[&x, &z]), z.achieved_energy());
}

#[test]
fn enrichment_follows_rank_sweep() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let (n, m) = (40, 12);
    let sig: Vec<f64> = (0..m).map(|k| 10.0 * 10f64.powi(-(k as i32))).collect();
    let q = DMatrix::from_fn(n, m, |_, _| rng.random_range(-1.0..1.0)).qr().q();
    let v = DMatrix::from_fn(m, m, |_, _| rng.random_range(-1.0..1.0)).qr().q();
    let data = Matrix::from_fn(n, m, |i, j| (0..m).map(|l| q[(i, l)] * sig[l] * v[(j, l)]).sum());
    let snap = SnapshotMatrix::new(data.clone(), linspace(0.0, 1.0, m), vec![1.0], "u").unwrap();
    let start = pod_of_matrix(&data, Truncation::Rank(1)).unwrap();
    let others = vec![0.0; m];
    let mut last = f64::INFINITY;
    for steps in 1..6 {
        let (bases, errors, taken, exit) = enrich_new_parameter(
            std::slice::from_ref(&snap),
            std::slice::from_ref(&start),
            &others,
            0.0,
            EnrichmentGuard::Global,
            steps,
            NormKind::L2,
        )
        .unwrap();
        assert_eq!((taken, exit), (steps, EnrichmentExit::StepCap));
        assert_eq!(bases[0].rank(), 1 + steps);
        let sweep = pod_of_matrix(&data, Truncation::Rank(1 + steps)).unwrap();
        let oracle = relative_errors(&data, &pod_approximation(&data, &sweep).unwrap(), NormKind::L2)
            .unwrap();
        for (a, b) in errors[0].iter().zip(&oracle) {
            assert!((a - b).abs() <= 1e-10 * b.max(1e-6));
        }
        let worst = errors[0].iter().copied().fold(0.0, f64::max);
        assert!(worst < last);
        last = worst;
    }
}

#[test]
fn enrichment_guard_cases() {
    let data = Matrix::from_fn(5, 3, |i, j| ((i + 1) * (j + 2)) as f64 + if i == j { 1.0 } else { 0.0 });
    let snap = SnapshotMatrix::new(data.clone(), vec![0.0, 0.5, 1.0], vec![1.0], "u").unwrap();
    let b = pod_of_matrix(&data, Truncation::Rank(1)).unwrap();
    let slice = std::slice::from_ref(&snap);
    let bases = std::slice::from_ref(&b);
    // Error already within the estimate: nothing to do.
    let (_, _, steps, exit) =
        enrich_new_parameter(slice, bases, &[0.0; 3], 10.0, EnrichmentGuard::Global, 5, NormKind::L2).unwrap();
    assert_eq!((steps, exit), (0, EnrichmentExit::Satisfied));
    // Largest error elsewhere in the set: nothing to do either.
    let (_, _, steps, _) =
        enrich_new_parameter(slice, bases, &[1.0; 3], 0.0, EnrichmentGuard::Global, 5, NormKind::L2).unwrap();
    assert_eq!(steps, 0);
    // Always behind: grows to full rank.
    let (grown, errors, steps, exit) =
        enrich_new_parameter(slice, bases, &[0.0; 3], 0.0, EnrichmentGuard::PerTime, 50, NormKind::L2).unwrap();
    assert_eq!(exit, EnrichmentExit::RankExhausted);
    assert_eq!(grown[0].rank(), grown[0].max_rank());
    assert_eq!(steps, grown[0].max_rank() - 1);
    assert!(errors[0].iter().all(|&e| e <= 1e-14));
}

#[test]
fn huge_tolerance_skips_the_loop() {
    let out = run_offline(&small_burgers(), &small_config(10.0)).unwrap();
    assert!(out.report.selected_indices.is_empty());
    assert!(out.report.history.is_empty());
    assert_eq!(out.surrogate.parameters().len(), 4);
    assert!(out.report.terminal_estimate.is_some());
}

#[test]
fn loop_invariants_on_small_burgers() {
    let cfg = small_config(2e-2);
    let out = run_offline(&small_burgers(), &cfg).unwrap();
    let r = &out.report;
    assert!(!r.tolerance_unreachable);
    assert!(!r.selected_indices.is_empty());
    let mut in_set: Vec<usize> = cfg.initial_indices.clone();
    for (k, h) in r.history.iter().enumerate() {
        assert_eq!(h.iteration, k + 1);
        // Candidates at selection time are exactly the grid minus the set.
        let mut seen: Vec<usize> = h.candidates.iter().map(|c| c.index).collect();
        seen.extend(&in_set);
        seen.sort_unstable();
        assert_eq!(seen, (0..cfg.candidate_grid.len()).collect::<Vec<_>>());
        let chosen = h.candidates.iter().find(|c| c.index == h.index).unwrap();
        assert_eq!(chosen.estimate, h.estimate);
        assert_eq!(select_next(&h.candidates).unwrap().index, h.index);
        assert!(h.estimate > cfg.tolerance);
        let settled = h.new_max_error <= h.estimate || h.new_max_error <= h.previous_max_error;
        let warned = r.warnings.iter().any(|w| match w {
            Warning::RankExhausted { iteration, .. } | Warning::EnrichmentCapReached { iteration, .. } => {
                *iteration == h.iteration
            }
        });
        assert!(settled || warned, "iteration {}", h.iteration);
        in_set.push(h.index);
    }
    assert_eq!(r.parameters.len(), in_set.len());
    let eta_hat = r.energy_hat[0];
    assert!(r.parameters.iter().all(|p| eta_hat <= p.energies[0]));
    assert!(r.terminal_estimate.unwrap().estimate <= cfg.tolerance);
    // Estimator exactness at every training parameter.
    for (p, snaps) in r.parameters.iter().zip(&out.error_snapshots) {
        let e = out.estimators[0].estimate(&p.parameter).unwrap();
        assert!((e / snaps[0].max_error().max(1e-16) - 1.0).abs() <= 1e-8);
    }
}

#[test]
fn runs_are_deterministic() {
    let cfg = small_config(2e-2);
    let a = run_offline(&small_burgers(), &cfg).unwrap();
    let b = run_offline(&small_burgers(), &cfg).unwrap();
    assert_eq!(a.report, b.report);
}

#[test]
fn exhausted_candidates_are_flagged() {
    let mut cfg = small_config(1e-9);
    cfg.candidate_grid.truncate(8);
    cfg.initial_indices = vec![0, 7];
    let out = run_offline(&small_burgers(), &cfg).unwrap();
    assert!(out.report.tolerance_unreachable);
    assert_eq!(out.report.parameters.len(), 8);
    let mut capped = small_config(1e-9);
    capped.max_iterations = Some(2);
    let out = run_offline(&small_burgers(), &capped).unwrap();
    assert!(out.report.iteration_cap_reached);
    assert_eq!(out.report.selected_indices.len(), 2);
}

#[test]
fn config_validation() {
    let bad = [
        ActiveLearningConfig { initial_indices: vec![0], ..small_config(0.1) },
        ActiveLearningConfig { initial_indices: vec![0, 0], ..small_config(0.1) },
        ActiveLearningConfig { initial_indices: vec![0, 30], ..small_config(0.1) },
        ActiveLearningConfig { tolerance: 0.0, ..small_config(0.1) },
        ActiveLearningConfig { initial_energy: 1.0, ..small_config(0.1) },
        ActiveLearningConfig { max_enrichment_steps: Some(0), ..small_config(0.1) },
    ];
    for cfg in bad {
        assert!(matches!(run_offline(&small_burgers(), &cfg), Err(ActiveError::Config(_))));
    }
}

struct FailsAfter {
    inner: BurgersProvider,
    left: Cell<usize>,
}

impl FomProvider for FailsAfter {
    fn component_labels(&self) -> Vec<String> {
        self.inner.component_labels()
    }

    fn spatial_grid(&self) -> &[f64] {
        self.inner.spatial_grid()
    }

    fn solve(&self, mu: &[f64], t: &[f64]) -> Result<Vec<SnapshotMatrix>, FomError> {
        if self.left.get() == 0 {
            return Err(FomError::ConfigError("solver crashed".into()));
        }
        self.left.set(self.left.get() - 1);
        self.inner.solve(mu, t)
    }
}

#[test]
fn fom_failure_carries_partial_report() {
    let fom = FailsAfter {
        inner: small_burgers(),
        left: Cell::new(5),
    };
    match run_offline(&fom, &small_config(1e-9)) {
        Err(ActiveError::FomFailure { report, .. }) => {
            assert_eq!(report.parameters.len(), 5);
            assert_eq!(report.history.len(), 1);
        }
        other => panic!("expected a FOM failure, got {other:?}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn selection_is_argmax_with_lowest_index(values in prop::collection::vec(0u8..6, 1..30)) {
        let est: Vec<CandidateEstimate> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| ce(i * 3 % 31, v as f64))
            .collect();
        let picked = select_next(&est).unwrap();
        let best = est.iter().map(|c| c.estimate).fold(f64::MIN, f64::max);
        prop_assert_eq!(picked.estimate, best);
        let lowest = est.iter().filter(|c| c.estimate == best).map(|c| c.index).min().unwrap();
        prop_assert_eq!(picked.index, lowest);
    }
}
