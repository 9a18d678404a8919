use actlearn_core::grid::uniform_time_grid;
use actlearn_core::linalg::Matrix;
use actlearn_core::pod::{
    compute_pod, energy_criterion, increment_rank, minimal_rank, pod_approximation, pod_of_matrix,
    pod_project, pod_reconstruct, PodBasis, PodError, SnapshotMatrix, Truncation,
};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn snapshots(data: Matrix) -> SnapshotMatrix {
    let t = uniform_time_grid(1.0, data.cols() - 1);
    SnapshotMatrix::new(data, t, vec![1.0], "u").unwrap()
}

fn two_by_two() -> PodBasis {
    PodBasis::from_parts(Matrix::identity(2), vec![2.0, 1.0], Truncation::Rank(1)).unwrap()
}

/// Matrix with prescribed singular values `sig` (random orthonormal factors).
fn with_spectrum(rng: &mut ChaCha8Rng, n: usize, m: usize, sig: &[f64]) -> Matrix {
    let k = sig.len();
    let q = DMatrix::from_fn(n, k, |_, _| rng.random_range(-1.0..1.0)).qr().q();
    let v = DMatrix::from_fn(m, k, |_, _| rng.random_range(-1.0..1.0)).qr().q();
    Matrix::from_fn(n, m, |i, j| (0..k).map(|l| q[(i, l)] * sig[l] * v[(j, l)]).sum())
}

#[test]
fn rank_one_snapshots() {
    let a = [1.0, -2.0, 0.5, 3.0];
    let s = snapshots(Matrix::from_fn(4, 3, |i, j| a[i] * (j as f64 + 1.0)));
    let b = compute_pod(&s, Truncation::Energy(1e-4)).unwrap();
    assert_eq!(b.rank(), 1);
    assert_eq!(b.achieved_energy(), 0.0);
}

#[test]
fn two_value_spectrum() {
    let b = two_by_two();
    assert!((b.achieved_energy() - 0.2).abs() < 1e-15);
    let e = PodBasis::from_parts(Matrix::identity(2), vec![2.0, 1.0], Truncation::Energy(0.25))
        .unwrap();
    assert_eq!(e.rank(), 1);
    let up = increment_rank(&b).unwrap();
    assert_eq!(up.rank(), 2);
    assert_eq!(up.achieved_energy(), 0.0);
    assert_eq!(increment_rank(&up).unwrap_err(), PodError::RankExhausted { rank: 2 });
}

#[test]
fn invalid_requests() {
    let s = snapshots(Matrix::zeros(3, 3));
    assert_eq!(compute_pod(&s, Truncation::Rank(1)).unwrap_err(), PodError::ZeroSnapshot);
    let s = snapshots(Matrix::identity(3));
    assert!(matches!(
        compute_pod(&s, Truncation::Rank(4)),
        Err(PodError::RankExceedsData { requested: 4, available: 3 })
    ));
    assert!(matches!(
        compute_pod(&s, Truncation::Energy(1.0)),
        Err(PodError::InvalidEnergyTarget(_))
    ));
    assert!(SnapshotMatrix::new(Matrix::zeros(2, 3), vec![0.0, 1.0], vec![1.0], "u").is_err());
    assert!(
        SnapshotMatrix::new(Matrix::zeros(2, 2), vec![1.0, 0.0], vec![1.0], "u").is_err()
    );
}

#[test]
fn projection_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let u = Matrix::from_fn(6, 4, |_, _| rng.random_range(-1.0..1.0));
    let s = snapshots(u.clone());
    let full = compute_pod(&s, Truncation::Rank(4)).unwrap();
    let back = pod_reconstruct(&full, &pod_project(&s, &full).unwrap()).unwrap();
    assert!(back.sub(&u).unwrap().max_abs() <= 1e-10);

    let e1 = PodBasis::from_parts(Matrix::identity(6).leading_columns(1), vec![1.0], Truncation::Rank(1))
        .unwrap();
    let a = pod_project(&s, &e1).unwrap();
    assert_eq!(a.row(0), u.row(0));
    let zero = pod_reconstruct(&full, &Matrix::zeros(4, 3)).unwrap();
    assert_eq!(zero.max_abs(), 0.0);
}

#[test]
fn truncated_errors_match_nalgebra_svd() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let u = Matrix::from_fn(40, 15, |_, _| rng.random_range(-1.0..1.0));
    let na = DMatrix::from_column_slice(40, 15, u.as_col_major()).svd(true, true);
    // Sort the oracle triplets by decreasing σ.
    let mut order: Vec<usize> = (0..15).collect();
    order.sort_by(|&a, &b| na.singular_values[b].total_cmp(&na.singular_values[a]));
    let uu = na.u.as_ref().unwrap();
    let vt = na.v_t.as_ref().unwrap();
    for r in [1, 3, 7, 14] {
        let mut oracle = DMatrix::zeros(40, 15);
        for &k in &order[..r] {
            oracle += na.singular_values[k] * uu.column(k) * vt.row(k);
        }
        let ours = pod_approximation(&u, &pod_of_matrix(&u, Truncation::Rank(r)).unwrap()).unwrap();
        for j in 0..15 {
            let col: f64 = (0..40).map(|i| (u[(i, j)] - ours[(i, j)]).powi(2)).sum::<f64>().sqrt();
            let ocol: f64 = (0..40).map(|i| (u[(i, j)] - oracle[(i, j)]).powi(2)).sum::<f64>().sqrt();
            assert!((col - ocol).abs() <= 1e-10, "rank {r} column {j}");
        }
    }
}

#[test]
fn eckart_young_on_prescribed_spectrum() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let sig = [5.0, 2.0, 1.0, 0.5, 0.1];
    let u = with_spectrum(&mut rng, 30, 10, &sig);
    let b = pod_of_matrix(&u, Truncation::Rank(2)).unwrap();
    let resid = u.sub(&pod_approximation(&u, &b).unwrap()).unwrap().frobenius_norm().powi(2);
    let tail: f64 = sig[2..].iter().map(|s| s * s).sum();
    assert!((resid - tail).abs() <= 1e-9 * tail);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn energy_rank_is_minimal(seed in any::<u64>(), n in 2usize..40, m in 2usize..30, eta in 1e-8f64..0.5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = Matrix::from_fn(n, m, |_, _| rng.random_range(-1.0..1.0));
        let b = pod_of_matrix(&u, Truncation::Energy(eta)).unwrap();
        let sv = b.singular_values();
        let r = b.rank();
        prop_assert!(energy_criterion(sv, r) <= eta);
        prop_assert!(r == 1 || energy_criterion(sv, r - 1) > eta);
        // Brute-force scan over all ranks.
        let scan = (1..=sv.len()).find(|&k| energy_criterion(sv, k) <= eta).unwrap();
        prop_assert_eq!(scan, r);
        prop_assert_eq!(minimal_rank(sv, eta), r);
        prop_assert_eq!(b.achieved_energy(), energy_criterion(sv, r));
    }

    #[test]
    fn projection_is_idempotent(seed in any::<u64>(), n in 2usize..30, m in 2usize..20, r in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = Matrix::from_fn(n, m, |_, _| rng.random_range(-1.0..1.0));
        let s = snapshots(u);
        let b = compute_pod(&s, Truncation::Rank(r.min(n.min(m)))).unwrap();
        let a = pod_project(&s, &b).unwrap();
        let back = snapshots(pod_reconstruct(&b, &a).unwrap());
        let a2 = pod_project(&back, &b).unwrap();
        prop_assert!(a2.sub(&a).unwrap().max_abs() <= 1e-12 * a.max_abs().max(1.0));
    }

    #[test]
    fn energy_nonincreasing_in_rank(seed in any::<u64>(), n in 2usize..30, m in 2usize..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = Matrix::from_fn(n, m, |_, _| rng.random_range(-1.0..1.0));
        let mut b = pod_of_matrix(&u, Truncation::Rank(1)).unwrap();
        let mut last = b.achieved_energy();
        while b.rank() < b.max_rank() {
            b.increment_in_place().unwrap();
            prop_assert!(b.achieved_energy() <= last);
            last = b.achieved_energy();
        }
        prop_assert!(last.abs() <= 1e-15);
        prop_assert!(last.is_sign_positive());
    }
}
