//! Radial kernel-based shallow neural networks.
//!
//! A network with `r` hidden units evaluates
//! `y_k(x) = Σ_i W[i][k] φ(‖x − c_i‖)`. Training is exact interpolation with
//! the centers placed on the training points, so the weights solve one
//! linear system per output column against the same kernel ("distance")
//! matrix. The matrix is factored once and reused for every column.

use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)] // shadowed by std inherent methods when std is linked
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::linalg::{dot_compensated, lu_factor, residual_compensated, LinalgError, LuFactorization, Matrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Gaussian,
    Multiquadric,
    InverseMultiquadric,
    LinearSpline,
    CubicSpline,
    QuinticSpline,
    ThinPlateSpline,
}

impl KernelKind {
    pub const ALL: [KernelKind; 7] = [
        KernelKind::Gaussian,
        KernelKind::Multiquadric,
        KernelKind::InverseMultiquadric,
        KernelKind::LinearSpline,
        KernelKind::CubicSpline,
        KernelKind::QuinticSpline,
        KernelKind::ThinPlateSpline,
    ];

    /// Whether the shape factor enters the kernel formula.
    pub fn uses_shape_factor(self) -> bool {
        matches!(
            self,
            KernelKind::Gaussian | KernelKind::Multiquadric | KernelKind::InverseMultiquadric
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Gaussian => "gaussian",
            KernelKind::Multiquadric => "multiquadric",
            KernelKind::InverseMultiquadric => "inverse_multiquadric",
            KernelKind::LinearSpline => "linear_spline",
            KernelKind::CubicSpline => "cubic_spline",
            KernelKind::QuinticSpline => "quintic_spline",
            KernelKind::ThinPlateSpline => "thin_plate_spline",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A concrete kernel: kind plus shape factor `ε`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub shape_factor: f64,
}

impl KernelSpec {
    pub fn new(kind: KernelKind, shape_factor: f64) -> Result<Self, KsnnError> {
        if kind.uses_shape_factor() && !(shape_factor > 0.0 && shape_factor.is_finite()) {
            return Err(KsnnError::InvalidShapeFactor(shape_factor));
        }
        Ok(Self { kind, shape_factor })
    }

    #[inline]
    pub fn eval(&self, d: f64) -> f64 {
        kernel_eval(self, d)
    }
}

/// `φ(d)` for the kernel families of radial basis interpolation.
pub fn kernel_eval(spec: &KernelSpec, d: f64) -> f64 {
    let r = d / spec.shape_factor;
    match spec.kind {
        KernelKind::Gaussian => (-(r * r)).exp(),
        KernelKind::Multiquadric => (r * r + 1.0).sqrt(),
        KernelKind::InverseMultiquadric => 1.0 / (r * r + 1.0).sqrt(),
        KernelKind::LinearSpline => d,
        KernelKind::CubicSpline => d * d * d,
        KernelKind::QuinticSpline => d * d * d * d * d,
        KernelKind::ThinPlateSpline => {
            if d == 0.0 {
                0.0
            } else {
                d * d * d.ln()
            }
        }
    }
}

/// Kernel as configured: the shape factor may be left to the
/// mean-nearest-neighbor heuristic, resolved against each center set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelChoice {
    pub kind: KernelKind,
    #[serde(default)]
    pub shape_factor: Option<f64>,
}

impl Default for KernelChoice {
    fn default() -> Self {
        Self {
            kind: KernelKind::Multiquadric,
            shape_factor: None,
        }
    }
}

impl KernelChoice {
    pub fn resolve(&self, centers: &[Vec<f64>]) -> Result<KernelSpec, KsnnError> {
        let eps = match self.shape_factor {
            Some(e) => e,
            None => {
                let d = mean_nearest_neighbor_distance(centers);
                if d > 0.0 {
                    d
                } else {
                    1.0
                }
            }
        };
        KernelSpec::new(self.kind, eps)
    }
}

#[inline]
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Mean over points of the distance to the closest other point; zero for
/// fewer than two points.
pub fn mean_nearest_neighbor_distance(points: &[Vec<f64>]) -> f64 {
    if points.len() < 2 {
        return 0.0;
    }
    let total: f64 = points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            points
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, q)| euclidean(p, q))
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    total / points.len() as f64
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KsnnError {
    #[error("no training points")]
    Empty,
    #[error("points {first} and {second} coincide")]
    DuplicateCenters { first: usize, second: usize },
    #[error("distance matrix is singular for kernel {kind} with shape factor {shape_factor}")]
    SingularDistanceMatrix { kind: KernelKind, shape_factor: f64 },
    #[error("log-transformed training needs positive values; found {value} at row {row}")]
    NonPositiveValue { row: usize, value: f64 },
    #[error("invalid shape factor {0}")]
    InvalidShapeFactor(f64),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Factored kernel matrix for a fixed center set. Any number of networks
/// over the same centers can be trained from it with substitutions only.
#[derive(Clone, Debug)]
pub struct KsnnTrainer {
    centers: Vec<Vec<f64>>,
    kernel: KernelSpec,
    dmat: Matrix,
    lu: LuFactorization,
}

/// Refinement passes applied after the first solve.
const REFINEMENT_STEPS: usize = 2;

impl KsnnTrainer {
    pub fn new(points: &[Vec<f64>], kernel: KernelSpec) -> Result<Self, KsnnError> {
        let l = points.len();
        if l == 0 {
            return Err(KsnnError::Empty);
        }
        let dim = points[0].len();
        for p in points {
            if p.len() != dim {
                return Err(KsnnError::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                });
            }
        }
        check_distinct(points)?;

        let dmat = Matrix::from_fn(l, l, |j, i| kernel.eval(euclidean(&points[j], &points[i])));
        let lu = lu_factor(&dmat).map_err(|e| match e {
            LinalgError::SingularMatrix { .. } => KsnnError::SingularDistanceMatrix {
                kind: kernel.kind,
                shape_factor: kernel.shape_factor,
            },
            other => KsnnError::Linalg(other),
        })?;
        Ok(Self {
            centers: points.to_vec(),
            kernel,
            dmat,
            lu,
        })
    }

    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }

    pub fn kernel(&self) -> KernelSpec {
        self.kernel
    }

    /// `values` is `ℓ × q`: row `j` holds the targets at point `j`.
    pub fn train(&self, values: &Matrix, log_transform: bool) -> Result<Ksnn, KsnnError> {
        if values.rows() != self.centers.len() {
            return Err(KsnnError::DimensionMismatch {
                expected: self.centers.len(),
                found: values.rows(),
            });
        }
        let weights = if log_transform {
            let mut logged = values.clone();
            for c in 0..logged.cols() {
                for (row, v) in logged.column_mut(c).iter_mut().enumerate() {
                    if !(*v > 0.0 && v.is_finite()) {
                        return Err(KsnnError::NonPositiveValue { row, value: *v });
                    }
                    *v = v.ln();
                }
            }
            self.solve_refined(&logged)?
        } else {
            self.solve_refined(values)?
        };
        Ok(Ksnn {
            centers: self.centers.clone(),
            weights,
            kernel: self.kernel,
            log_transformed: log_transform,
        })
    }
}

impl KsnnTrainer {
    /// Solve with iterative refinement against the kernel matrix; the
    /// splines get ill-conditioned quickly.
    fn solve_refined(&self, rhs: &Matrix) -> Result<Matrix, LinalgError> {
        let mut w = self.lu.solve_many(rhs)?;
        for _ in 0..REFINEMENT_STEPS {
            // `dmat` is symmetric, so its columns are its rows.
            let resid = Matrix::from_fn(rhs.rows(), rhs.cols(), |i, k| {
                residual_compensated(rhs[(i, k)], self.dmat.column(i), w.column(k))
            });
            if resid.max_abs() == 0.0 {
                break;
            }
            let dw = self.lu.solve_many(&resid)?;
            for (x, d) in w.as_col_major_mut().iter_mut().zip(dw.as_col_major()) {
                *x += d;
            }
        }
        Ok(w)
    }
}

fn check_distinct(points: &[Vec<f64>]) -> Result<(), KsnnError> {
    let mut diameter = 0.0f64;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            diameter = diameter.max(euclidean(&points[i], &points[j]));
        }
    }
    let tol = 1e-12 * diameter;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if euclidean(&points[i], &points[j]) <= tol {
                return Err(KsnnError::DuplicateCenters { first: i, second: j });
            }
        }
    }
    Ok(())
}

/// A trained network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ksnn {
    centers: Vec<Vec<f64>>,
    /// `r × q`, `weights[(i, k)]` couples hidden unit `i` to output `k`.
    weights: Matrix,
    kernel: KernelSpec,
    log_transformed: bool,
}

impl Ksnn {
    /// Exact-interpolation training with a single factorization of the
    /// kernel matrix shared by all `q` output columns.
    pub fn train(
        points: &[Vec<f64>],
        values: &Matrix,
        kernel: KernelSpec,
        log_transform: bool,
    ) -> Result<Self, KsnnError> {
        KsnnTrainer::new(points, kernel)?.train(values, log_transform)
    }

    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn kernel(&self) -> KernelSpec {
        self.kernel
    }

    pub fn is_log_transformed(&self) -> bool {
        self.log_transformed
    }

    pub fn input_dim(&self) -> usize {
        self.centers.first().map_or(0, Vec::len)
    }

    pub fn output_dim(&self) -> usize {
        self.weights.cols()
    }

    /// Hidden-layer activations `φ(‖x − c_i‖)`.
    pub fn kernel_row(&self, x: &[f64]) -> Result<Vec<f64>, KsnnError> {
        kernel_row(&self.centers, &self.kernel, x)
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>, KsnnError> {
        let row = self.kernel_row(x)?;
        Ok(self.evaluate_from_kernel_row(&row))
    }

    /// Output layer only, for callers evaluating many networks that share
    /// centers and kernel at the same input.
    pub fn evaluate_from_kernel_row(&self, row: &[f64]) -> Vec<f64> {
        debug_assert_eq!(row.len(), self.weights.rows());
        let mut out: Vec<f64> = (0..self.weights.cols())
            .map(|k| dot_compensated(self.weights.column(k), row))
            .collect();
        if self.log_transformed {
            for v in &mut out {
                *v = v.exp();
            }
        }
        out
    }
}

pub fn kernel_row(
    centers: &[Vec<f64>],
    kernel: &KernelSpec,
    x: &[f64],
) -> Result<Vec<f64>, KsnnError> {
    let dim = centers.first().map_or(0, Vec::len);
    if x.len() != dim {
        return Err(KsnnError::DimensionMismatch {
            expected: dim,
            found: x.len(),
        });
    }
    Ok(centers.iter().map(|c| kernel.eval(euclidean(x, c))).collect())
}
