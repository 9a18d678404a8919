//! Snapshot matrices and parameter-specific POD bases.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::linalg::{thin_svd, LinalgError, Matrix};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PodError {
    #[error("snapshot matrix has no nonzero singular value")]
    ZeroSnapshot,
    #[error("requested rank {requested} exceeds numerical rank {available}")]
    RankExceedsData { requested: usize, available: usize },
    #[error("basis already at full numerical rank {rank}")]
    RankExhausted { rank: usize },
    #[error("energy target {0} outside [0, 1)")]
    InvalidEnergyTarget(f64),
    #[error("rank must be at least 1")]
    ZeroRank,
    #[error("invalid snapshot matrix: {0}")]
    InvalidSnapshot(&'static str),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// One component's trajectory at one parameter: column `j` is the state
/// at `time_grid[j]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMatrix {
    data: Matrix,
    time_grid: Vec<f64>,
    parameter: Vec<f64>,
    label: String,
}

impl SnapshotMatrix {
    pub fn new(
        data: Matrix,
        time_grid: Vec<f64>,
        parameter: Vec<f64>,
        label: impl Into<String>,
    ) -> Result<Self, PodError> {
        if data.cols() != time_grid.len() {
            return Err(PodError::DimensionMismatch {
                expected: time_grid.len(),
                found: data.cols(),
            });
        }
        if !data.is_finite() {
            return Err(PodError::InvalidSnapshot("non-finite entries"));
        }
        if time_grid.windows(2).any(|w| !(w[1] >= w[0])) {
            return Err(PodError::InvalidSnapshot("time grid not nondecreasing"));
        }
        Ok(Self {
            data,
            time_grid,
            parameter,
            label: label.into(),
        })
    }

    pub fn data(&self) -> &Matrix {
        &self.data
    }

    pub fn into_data(self) -> Matrix {
        self.data
    }

    pub fn time_grid(&self) -> &[f64] {
        &self.time_grid
    }

    pub fn parameter(&self) -> &[f64] {
        &self.parameter
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Spatial dimension `N`.
    pub fn state_dim(&self) -> usize {
        self.data.rows()
    }

    /// `N_t + 1`.
    pub fn time_count(&self) -> usize {
        self.data.cols()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Truncation {
    Rank(usize),
    /// Largest admissible discarded-energy fraction. Zero keeps the full
    /// numerical rank.
    Energy(f64),
}

/// Discarded energy `1 − Σ_{k≤r} σ_k² / Σ_k σ_k²`, evaluated as a tail sum
/// so values far below machine epsilon keep their relative accuracy.
pub fn energy_criterion(singular_values: &[f64], rank: usize) -> f64 {
    let total: f64 = singular_values.iter().map(|s| s * s).sum();
    if total == 0.0 {
        return 0.0;
    }
    // fold from +0.0; an empty float sum is -0.0
    let tail = singular_values
        .iter()
        .skip(rank)
        .rev()
        .fold(0.0, |acc, s| acc + s * s);
    (tail / total).clamp(0.0, 1.0)
}

/// Smallest rank whose discarded energy is at most `target`.
pub fn minimal_rank(singular_values: &[f64], target: f64) -> usize {
    let total: f64 = singular_values.iter().map(|s| s * s).sum();
    if total == 0.0 {
        return 0;
    }
    // tails[r] = Σ_{k>r} σ_k², accumulated from the small end.
    let s = singular_values.len();
    let mut tails = alloc::vec![0.0; s + 1];
    for r in (0..s).rev() {
        tails[r] = tails[r + 1] + singular_values[r] * singular_values[r];
    }
    (1..=s)
        .find(|&r| tails[r] / total <= target)
        .unwrap_or(s)
}

/// Orthonormal POD basis of one snapshot matrix. All left singular vectors
/// and singular values are kept so the rank can grow without another SVD.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PodBasis {
    vectors: Matrix,
    singular_values: Vec<f64>,
    rank: usize,
    achieved_energy: f64,
}

impl PodBasis {
    /// Builds a basis from precomputed left vectors and singular values.
    pub fn from_parts(
        vectors: Matrix,
        singular_values: Vec<f64>,
        truncation: Truncation,
    ) -> Result<Self, PodError> {
        if vectors.cols() != singular_values.len() {
            return Err(PodError::DimensionMismatch {
                expected: singular_values.len(),
                found: vectors.cols(),
            });
        }
        let s = singular_values.len();
        if s == 0 {
            return Err(PodError::ZeroSnapshot);
        }
        let rank = match truncation {
            Truncation::Rank(0) => return Err(PodError::ZeroRank),
            Truncation::Rank(r) if r > s => {
                return Err(PodError::RankExceedsData {
                    requested: r,
                    available: s,
                })
            }
            Truncation::Rank(r) => r,
            Truncation::Energy(eta) => {
                if !(0.0..1.0).contains(&eta) {
                    return Err(PodError::InvalidEnergyTarget(eta));
                }
                minimal_rank(&singular_values, eta)
            }
        };
        let achieved_energy = energy_criterion(&singular_values, rank);
        Ok(Self {
            vectors,
            singular_values,
            rank,
            achieved_energy,
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Numerical rank `s` of the snapshot matrix.
    pub fn max_rank(&self) -> usize {
        self.singular_values.len()
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    pub fn achieved_energy(&self) -> f64 {
        self.achieved_energy
    }

    pub fn state_dim(&self) -> usize {
        self.vectors.rows()
    }

    /// The truncated basis `Φ` (`N × r`).
    pub fn basis(&self) -> Matrix {
        self.vectors.leading_columns(self.rank)
    }

    pub fn basis_vector(&self, k: usize) -> &[f64] {
        self.vectors.column(k)
    }

    pub fn with_rank(&self, rank: usize) -> Result<Self, PodError> {
        Self::from_parts(
            self.vectors.clone(),
            self.singular_values.clone(),
            Truncation::Rank(rank),
        )
    }

    /// Adds the next singular direction in place.
    pub fn increment_in_place(&mut self) -> Result<(), PodError> {
        if self.rank >= self.max_rank() {
            return Err(PodError::RankExhausted { rank: self.rank });
        }
        self.rank += 1;
        self.achieved_energy = energy_criterion(&self.singular_values, self.rank);
        Ok(())
    }
}

pub fn compute_pod(snapshots: &SnapshotMatrix, truncation: Truncation) -> Result<PodBasis, PodError> {
    pod_of_matrix(snapshots.data(), truncation)
}

pub fn pod_of_matrix(data: &Matrix, truncation: Truncation) -> Result<PodBasis, PodError> {
    let svd = thin_svd(data)?;
    if svd.rank() == 0 {
        return Err(PodError::ZeroSnapshot);
    }
    PodBasis::from_parts(svd.left_vectors, svd.singular_values, truncation)
}

/// Reduced coordinates `A = Φᵀ U`.
pub fn pod_project(snapshots: &SnapshotMatrix, basis: &PodBasis) -> Result<Matrix, PodError> {
    project_matrix(snapshots.data(), basis)
}

pub fn project_matrix(data: &Matrix, basis: &PodBasis) -> Result<Matrix, PodError> {
    if data.rows() != basis.state_dim() {
        return Err(PodError::DimensionMismatch {
            expected: basis.state_dim(),
            found: data.rows(),
        });
    }
    let m = data.cols();
    let r = basis.rank();
    let mut out = Matrix::zeros(r, m);
    for j in 0..m {
        let col = data.column(j);
        for k in 0..r {
            out[(k, j)] = crate::linalg::dot(basis.basis_vector(k), col);
        }
    }
    Ok(out)
}

/// `Φ A`.
pub fn pod_reconstruct(basis: &PodBasis, coefficients: &Matrix) -> Result<Matrix, PodError> {
    let r = basis.rank();
    if coefficients.rows() != r {
        return Err(PodError::DimensionMismatch {
            expected: r,
            found: coefficients.rows(),
        });
    }
    let n = basis.state_dim();
    let m = coefficients.cols();
    let mut out = Matrix::zeros(n, m);
    for j in 0..m {
        let dst = out.column_mut(j);
        for k in 0..r {
            let a = coefficients[(k, j)];
            if a == 0.0 {
                continue;
            }
            for (o, &p) in dst.iter_mut().zip(basis.basis_vector(k)) {
                *o += a * p;
            }
        }
    }
    Ok(out)
}

/// Orthogonal projection `Φ Φᵀ U` of a snapshot matrix onto the basis.
pub fn pod_approximation(data: &Matrix, basis: &PodBasis) -> Result<Matrix, PodError> {
    pod_reconstruct(basis, &project_matrix(data, basis)?)
}

/// Returns the basis with rank one higher.
pub fn increment_rank(basis: &PodBasis) -> Result<PodBasis, PodError> {
    let mut out = basis.clone();
    out.increment_in_place()?;
    Ok(out)
}
