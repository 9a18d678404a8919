use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by std inherent methods when std is linked
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::eigen::symmetric_eigen;
use super::matrix::{dot, norm2};
use super::{LinalgError, Matrix};

/// Singular values below this fraction of the largest one count as zero.
pub const RANK_CUTOFF: f64 = 1e-12;

/// The method of snapshots is used when `rows > SNAPSHOT_RATIO * cols`.
pub const SNAPSHOT_RATIO: usize = 4;

const MAX_SWEEPS: usize = 80;

/// Thin SVD `A = U Σ Vᵀ` restricted to the numerically nonzero spectrum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThinSvd {
    pub left_vectors: Matrix,
    pub singular_values: Vec<f64>,
    pub right_vectors: Matrix,
}

impl ThinSvd {
    pub fn rank(&self) -> usize {
        self.singular_values.len()
    }

    /// `U_r Σ_r V_rᵀ` using the leading `r` triplets.
    pub fn reconstruct(&self, r: usize) -> Matrix {
        let r = r.min(self.rank());
        let (n, m) = (self.left_vectors.rows(), self.right_vectors.rows());
        let mut out = Matrix::zeros(n, m);
        for k in 0..r {
            let u = self.left_vectors.column(k);
            let v = self.right_vectors.column(k);
            let s = self.singular_values[k];
            for (j, &vj) in v.iter().enumerate() {
                let coef = s * vj;
                for (o, &ui) in out.column_mut(j).iter_mut().zip(u) {
                    *o += ui * coef;
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SvdMethod {
    /// One-sided Jacobi on the matrix itself.
    Direct,
    /// Eigendecomposition of the Gram matrix `AᵀA`.
    Snapshots,
}

impl SvdMethod {
    pub fn auto(rows: usize, cols: usize) -> Self {
        if rows > SNAPSHOT_RATIO * cols {
            SvdMethod::Snapshots
        } else {
            SvdMethod::Direct
        }
    }
}

/// Thin SVD with automatic choice between the direct and snapshot paths.
pub fn thin_svd(matrix: &Matrix) -> Result<ThinSvd, LinalgError> {
    thin_svd_with(matrix, SvdMethod::auto(matrix.rows(), matrix.cols()))
}

pub fn thin_svd_with(matrix: &Matrix, method: SvdMethod) -> Result<ThinSvd, LinalgError> {
    if !matrix.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let svd = match method {
        SvdMethod::Direct => {
            if matrix.rows() >= matrix.cols() {
                jacobi_tall(matrix)?
            } else {
                let t = jacobi_tall(&matrix.transpose())?;
                ThinSvd {
                    left_vectors: t.right_vectors,
                    singular_values: t.singular_values,
                    right_vectors: t.left_vectors,
                }
            }
        }
        SvdMethod::Snapshots => method_of_snapshots(matrix)?,
    };
    if !(svd.left_vectors.is_finite() && svd.right_vectors.is_finite()) {
        return Err(LinalgError::NonFinite);
    }
    Ok(svd)
}

/// One-sided (Hestenes) Jacobi for `rows >= cols`.
fn jacobi_tall(a: &Matrix) -> Result<ThinSvd, LinalgError> {
    let (m, n) = a.shape();
    let mut u = a.clone();
    let mut v = Matrix::identity(n);
    let tol = f64::EPSILON * (m.max(1) as f64);
    // Columns at round-off level relative to the whole matrix carry no
    // information; rotating them never settles.
    let negligible = (f64::EPSILON * a.frobenius_norm()).powi(2);

    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let (up, uq) = u.two_columns_mut(p, q);
                let alpha = dot(up, up);
                let beta = dot(uq, uq);
                let gamma = dot(up, uq);
                if gamma == 0.0
                    || alpha <= negligible
                    || beta <= negligible
                    || gamma.abs() <= tol * (alpha * beta).sqrt()
                {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + zeta.hypot(1.0));
                let c = 1.0 / t.hypot(1.0);
                let s = c * t;
                rotate(up, uq, c, s);
                let (vp, vq) = v.two_columns_mut(p, q);
                rotate(vp, vq, c, s);
            }
        }
        converged = !rotated;
    }
    if !converged {
        return Err(LinalgError::NoConvergence);
    }

    let norms: Vec<f64> = (0..n).map(|j| norm2(u.column(j))).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let smax = order.first().map_or(0.0, |&k| norms[k]);
    let keep: Vec<usize> = order
        .into_iter()
        .filter(|&k| smax > 0.0 && norms[k] > RANK_CUTOFF * smax)
        .collect();

    let s = keep.len();
    let mut left = Matrix::zeros(m, s);
    let mut right = Matrix::zeros(n, s);
    let mut sigma = Vec::with_capacity(s);
    for (dst, &k) in keep.iter().enumerate() {
        let nk = norms[k];
        for (o, &x) in left.column_mut(dst).iter_mut().zip(u.column(k)) {
            *o = x / nk;
        }
        right.column_mut(dst).copy_from_slice(v.column(k));
        sigma.push(nk);
    }
    Ok(ThinSvd {
        left_vectors: left,
        singular_values: sigma,
        right_vectors: right,
    })
}

#[inline]
fn rotate(x: &mut [f64], y: &mut [f64], c: f64, s: f64) {
    for (a, b) in x.iter_mut().zip(y.iter_mut()) {
        let xa = *a;
        let yb = *b;
        *a = c * xa - s * yb;
        *b = s * xa + c * yb;
    }
}

/// Sirovich's method of snapshots: eigenvectors of `AᵀA` give the right
/// singular vectors, left ones follow from `U = A V Σ⁻¹`.
///
/// The recovered left vectors lose orthogonality for small singular values
/// (the Gram matrix squares the condition number), so they are
/// re-orthogonalized with two passes of modified Gram-Schmidt.
fn method_of_snapshots(a: &Matrix) -> Result<ThinSvd, LinalgError> {
    let (n, m) = a.shape();
    let gram = a.tr_matmul(a)?;
    let eig = symmetric_eigen(&gram)?;
    let lmax = eig.values.last().copied().unwrap_or(0.0);
    let smax = lmax.max(0.0).sqrt();

    let mut sigma = Vec::new();
    let mut right_cols = Vec::new();
    for k in (0..m).rev() {
        let lam = eig.values[k];
        if lam <= 0.0 {
            continue;
        }
        let s = lam.sqrt();
        if s > RANK_CUTOFF * smax {
            sigma.push(s);
            right_cols.push(k);
        }
    }

    let mut left_cols: Vec<Vec<f64>> = Vec::with_capacity(sigma.len());
    let mut kept_sigma = Vec::with_capacity(sigma.len());
    let mut kept_right = Vec::with_capacity(sigma.len());
    for (&s, &k) in sigma.iter().zip(&right_cols) {
        let mut u = a.mul_vec(eig.vectors.column(k))?;
        for x in u.iter_mut() {
            *x /= s;
        }
        for _ in 0..2 {
            for prev in &left_cols {
                let proj = dot(prev, &u);
                for (x, p) in u.iter_mut().zip(prev) {
                    *x -= proj * p;
                }
            }
        }
        let nu = norm2(&u);
        // A direction swallowed by earlier vectors carries no new information.
        if nu < 1e-8 {
            continue;
        }
        for x in u.iter_mut() {
            *x /= nu;
        }
        left_cols.push(u);
        kept_sigma.push(s);
        kept_right.push(eig.vectors.column(k).to_vec());
    }

    let left = if left_cols.is_empty() {
        Matrix::zeros(n, 0)
    } else {
        Matrix::from_columns(&left_cols)?
    };
    let right = if kept_right.is_empty() {
        Matrix::zeros(m, 0)
    } else {
        Matrix::from_columns(&kept_right)?
    };
    Ok(ThinSvd {
        left_vectors: left,
        singular_values: kept_sigma,
        right_vectors: right,
    })
}
