//! Interpolated relative POD error over the parameter domain.
//!
//! Each training parameter contributes the per-time relative error of its
//! POD approximation. For every time instance a log-transformed kernel
//! network interpolates those errors in parameter space, and the estimate
//! at a parameter is the maximum over time of the interpolated values.
//! All time instances share one center set, so they are trained as the
//! output columns of a single network and evaluated with one kernel row.

use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)] // shadowed by std inherent methods when std is linked
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::grid::ParameterSpace;
use crate::ksnn::{KernelChoice, Ksnn, KsnnError, KsnnTrainer};
use crate::linalg::Matrix;
use crate::pod::SnapshotMatrix;

/// Errors below this are raised to it before taking logarithms.
pub const ERROR_FLOOR: f64 = 1e-16;

/// Guard added to the denominator of relative errors.
pub const DENOMINATOR_GUARD: f64 = 1e-30;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    L1,
    #[default]
    L2,
    Linf,
}

impl NormKind {
    pub fn norm(self, v: &[f64]) -> f64 {
        match self {
            NormKind::L1 => v.iter().map(|x| x.abs()).sum(),
            NormKind::L2 => crate::linalg::norm2(v),
            NormKind::Linf => v.iter().fold(0.0, |m, x| m.max(x.abs())),
        }
    }

    /// Norm of `a − b` without allocating.
    pub fn norm_diff(self, a: &[f64], b: &[f64]) -> f64 {
        let diffs = a.iter().zip(b).map(|(x, y)| x - y);
        match self {
            NormKind::L1 => diffs.map(f64::abs).sum(),
            NormKind::L2 => {
                let scale = a
                    .iter()
                    .zip(b)
                    .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
                if scale == 0.0 {
                    return 0.0;
                }
                scale * diffs.map(|d| (d / scale) * (d / scale)).sum::<f64>().sqrt()
            }
            NormKind::Linf => diffs.fold(0.0, |m, d| m.max(d.abs())),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            NormKind::L1 => "l1",
            NormKind::L2 => "l2",
            NormKind::Linf => "linf",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "l1" => Some(NormKind::L1),
            "l2" => Some(NormKind::L2),
            "linf" => Some(NormKind::Linf),
            _ => None,
        }
    }
}

impl fmt::Display for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EstimatorError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("at least {needed} training parameters required, found {found}")]
    TooFewParameters { needed: usize, found: usize },
    #[error("error snapshots disagree on the number of time instances")]
    MismatchedTimeCounts,
    #[error("no component estimators supplied")]
    EmptyComponentList,
    #[error("relative error is negative or non-finite")]
    InvalidError,
    #[error(transparent)]
    Ksnn(#[from] KsnnError),
}

/// Per-time relative POD errors at one parameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorSnapshot {
    pub parameter: Vec<f64>,
    pub errors: Vec<f64>,
    pub norm_kind: NormKind,
}

impl ErrorSnapshot {
    pub fn max_error(&self) -> f64 {
        self.errors.iter().copied().fold(0.0, f64::max)
    }

    /// Index of the largest error, first one on ties.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (j, &e) in self.errors.iter().enumerate() {
            if e > self.errors[best] {
                best = j;
            }
        }
        best
    }
}

/// `ε_j = ‖truth_j − approx_j‖ / (‖truth_j‖ + 1e-30)` per column.
pub fn relative_error_norms(
    truth: &SnapshotMatrix,
    approx: &Matrix,
    norm_kind: NormKind,
) -> Result<ErrorSnapshot, EstimatorError> {
    Ok(ErrorSnapshot {
        parameter: truth.parameter().to_vec(),
        errors: relative_errors(truth.data(), approx, norm_kind)?,
        norm_kind,
    })
}

pub fn relative_errors(
    truth: &Matrix,
    approx: &Matrix,
    norm_kind: NormKind,
) -> Result<Vec<f64>, EstimatorError> {
    if truth.rows() != approx.rows() {
        return Err(EstimatorError::DimensionMismatch {
            expected: truth.rows(),
            found: approx.rows(),
        });
    }
    if truth.cols() != approx.cols() {
        return Err(EstimatorError::DimensionMismatch {
            expected: truth.cols(),
            found: approx.cols(),
        });
    }
    Ok((0..truth.cols())
        .map(|j| {
            let t = truth.column(j);
            norm_kind.norm_diff(t, approx.column(j)) / (norm_kind.norm(t) + DENOMINATOR_GUARD)
        })
        .collect())
}

/// Log-transformed interpolant of per-time errors over the parameter set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorEstimator {
    /// Output column `j` is the network for time instance `j`.
    network: Ksnn,
    parameters: Vec<Vec<f64>>,
    space: ParameterSpace,
    norm_kind: NormKind,
}

/// Trains the estimator on the current training set.
pub fn build_estimator(
    snapshots: &[ErrorSnapshot],
    kernel: &KernelChoice,
    space: &ParameterSpace,
) -> Result<ErrorEstimator, EstimatorError> {
    if snapshots.len() < 2 {
        return Err(EstimatorError::TooFewParameters {
            needed: 2,
            found: snapshots.len(),
        });
    }
    let times = snapshots[0].errors.len();
    if snapshots.iter().any(|s| s.errors.len() != times) {
        return Err(EstimatorError::MismatchedTimeCounts);
    }
    let parameters: Vec<Vec<f64>> = snapshots.iter().map(|s| s.parameter.clone()).collect();
    let coords = space.to_coords_all(&parameters);
    let spec = kernel.resolve(&coords)?;

    let mut values = Matrix::zeros(snapshots.len(), times);
    for (i, s) in snapshots.iter().enumerate() {
        for (j, &e) in s.errors.iter().enumerate() {
            if !(e >= 0.0 && e.is_finite()) {
                return Err(EstimatorError::InvalidError);
            }
            values[(i, j)] = e.max(ERROR_FLOOR);
        }
    }
    let network = KsnnTrainer::new(&coords, spec)?.train(&values, true)?;
    Ok(ErrorEstimator {
        network,
        parameters,
        space: space.clone(),
        norm_kind: snapshots[0].norm_kind,
    })
}

impl ErrorEstimator {
    pub fn time_count(&self) -> usize {
        self.network.output_dim()
    }

    pub fn parameters(&self) -> &[Vec<f64>] {
        &self.parameters
    }

    pub fn norm_kind(&self) -> NormKind {
        self.norm_kind
    }

    pub fn network(&self) -> &Ksnn {
        &self.network
    }

    /// Interpolated errors `ε̃_j(μ)` for every time instance.
    pub fn per_time(&self, mu: &[f64]) -> Result<Vec<f64>, EstimatorError> {
        Ok(self.network.evaluate(&self.space.to_coords(mu))?)
    }

    /// `ε̂(μ) = max_j |ε̃_j(μ)|`.
    pub fn estimate(&self, mu: &[f64]) -> Result<f64, EstimatorError> {
        Ok(self
            .per_time(mu)?
            .into_iter()
            .fold(0.0, |m, e| m.max(e.abs())))
    }

    pub fn estimate_many(&self, candidates: &[Vec<f64>]) -> Result<Vec<f64>, EstimatorError> {
        candidates.iter().map(|mu| self.estimate(mu)).collect()
    }
}

/// Mean of the component estimates at `μ`.
pub fn estimate_component_average(
    estimators: &[ErrorEstimator],
    mu: &[f64],
) -> Result<f64, EstimatorError> {
    if estimators.is_empty() {
        return Err(EstimatorError::EmptyComponentList);
    }
    let mut sum = 0.0;
    for e in estimators {
        sum += e.estimate(mu)?;
    }
    Ok(sum / estimators.len() as f64)
}
