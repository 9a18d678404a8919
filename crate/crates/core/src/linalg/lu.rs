use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{LinalgError, Matrix};

/// Relative pivot threshold: a pivot smaller than this times the largest
/// input entry marks the matrix as singular.
pub const PIVOT_THRESHOLD: f64 = 1e-14;

/// Row-pivoted LU factorization `P A = L U`.
///
/// `permutation[i]` is the row of the original matrix that ended up in row
/// `i`. `combined` holds `U` on and above the diagonal and the strictly lower
/// part of the unit-diagonal `L` below it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LuFactorization {
    permutation: Vec<usize>,
    combined: Matrix,
}

impl LuFactorization {
    pub fn dim(&self) -> usize {
        self.permutation.len()
    }

    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    pub fn combined(&self) -> &Matrix {
        &self.combined
    }

    pub fn lower(&self) -> Matrix {
        let n = self.dim();
        Matrix::from_fn(n, n, |i, j| match i.cmp(&j) {
            core::cmp::Ordering::Greater => self.combined[(i, j)],
            core::cmp::Ordering::Equal => 1.0,
            core::cmp::Ordering::Less => 0.0,
        })
    }

    pub fn upper(&self) -> Matrix {
        let n = self.dim();
        Matrix::from_fn(n, n, |i, j| if i <= j { self.combined[(i, j)] } else { 0.0 })
    }

    /// Rebuilds the factored matrix from `P`, `L` and `U`.
    pub fn reconstruct(&self) -> Matrix {
        let lu = self
            .lower()
            .matmul(&self.upper())
            .expect("square factors have matching shapes");
        let n = self.dim();
        let mut a = Matrix::zeros(n, n);
        for (i, &orig) in self.permutation.iter().enumerate() {
            for j in 0..n {
                a[(orig, j)] = lu[(i, j)];
            }
        }
        a
    }

    /// Solves `A X = B` for every column of `B`, reusing the factorization.
    pub fn solve_many(&self, rhs: &Matrix) -> Result<Matrix, LinalgError> {
        let n = self.dim();
        if rhs.rows() != n {
            return Err(LinalgError::DimensionMismatch {
                expected: n,
                found: rhs.rows(),
            });
        }
        let mut out = Matrix::zeros(n, rhs.cols());
        for c in 0..rhs.cols() {
            let b = rhs.column(c);
            let x = out.column_mut(c);
            for (xi, &p) in x.iter_mut().zip(&self.permutation) {
                *xi = b[p];
            }
            self.substitute_in_place(x);
        }
        Ok(out)
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
        let n = self.dim();
        if b.len() != n {
            return Err(LinalgError::DimensionMismatch {
                expected: n,
                found: b.len(),
            });
        }
        let mut x: Vec<f64> = self.permutation.iter().map(|&p| b[p]).collect();
        self.substitute_in_place(&mut x);
        Ok(x)
    }

    /// Forward then backward substitution on an already permuted vector.
    fn substitute_in_place(&self, x: &mut [f64]) {
        let n = self.dim();
        let lu = &self.combined;
        // L y = Pb, column-oriented so the inner loop walks contiguous memory.
        for k in 0..n {
            let xk = x[k];
            if xk != 0.0 {
                let col = lu.column(k);
                for i in k + 1..n {
                    x[i] -= col[i] * xk;
                }
            }
        }
        // U x = y
        for k in (0..n).rev() {
            let col = lu.column(k);
            x[k] /= col[k];
            let xk = x[k];
            if xk != 0.0 {
                for i in 0..k {
                    x[i] -= col[i] * xk;
                }
            }
        }
    }
}

/// Factors a square matrix with partial (row) pivoting.
pub fn lu_factor(matrix: &Matrix) -> Result<LuFactorization, LinalgError> {
    let (n, m) = matrix.shape();
    if n != m {
        return Err(LinalgError::NotSquare { rows: n, cols: m });
    }
    if !matrix.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let threshold = PIVOT_THRESHOLD * matrix.max_abs();
    let mut a = matrix.clone();
    let mut perm: Vec<usize> = (0..n).collect();

    for k in 0..n {
        let (p, pivot_abs) = (k..n)
            .map(|i| (i, a[(i, k)].abs()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pivot_abs <= threshold || pivot_abs == 0.0 {
            return Err(LinalgError::SingularMatrix { pivot: k });
        }
        if p != k {
            perm.swap(p, k);
            for j in 0..n {
                let col = a.column_mut(j);
                col.swap(p, k);
            }
        }
        let pivot = a[(k, k)];
        {
            let col = a.column_mut(k);
            for v in &mut col[k + 1..] {
                *v /= pivot;
            }
        }
        let multipliers: Vec<f64> = a.column(k)[k + 1..].to_vec();
        for j in k + 1..n {
            let akj = a[(k, j)];
            if akj == 0.0 {
                continue;
            }
            let col = a.column_mut(j);
            for (v, l) in col[k + 1..].iter_mut().zip(&multipliers) {
                *v -= l * akj;
            }
        }
    }

    Ok(LuFactorization {
        permutation: perm,
        combined: a,
    })
}

/// Solves against `q` right-hand sides with one factorization.
pub fn lu_solve_many(fact: &LuFactorization, rhs: &Matrix) -> Result<Matrix, LinalgError> {
    fact.solve_many(rhs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_factors_trivially() {
        let f = lu_factor(&Matrix::identity(2)).unwrap();
        assert_eq!(f.permutation(), &[0, 1]);
        assert_eq!(f.lower(), Matrix::identity(2));
        assert_eq!(f.upper(), Matrix::identity(2));
        let rhs = Matrix::from_row_slice(2, 2, &[3.0, -1.0, 7.0, 0.5]).unwrap();
        assert_eq!(lu_solve_many(&f, &rhs).unwrap(), rhs);
    }

    #[test]
    fn permutation_matrix_swaps_rows() {
        let a = Matrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let f = lu_factor(&a).unwrap();
        assert_eq!(f.permutation(), &[1, 0]);
        assert_eq!(f.upper(), Matrix::identity(2));
        assert_eq!(f.lower(), Matrix::identity(2));
        let x = lu_solve_many(&f, &Matrix::identity(2)).unwrap();
        assert_eq!(x, a);
    }

    #[test]
    fn singular_and_shape_errors() {
        let a = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]).unwrap();
        assert_eq!(
            lu_factor(&a).unwrap_err(),
            LinalgError::SingularMatrix { pivot: 1 }
        );
        assert!(matches!(
            lu_factor(&Matrix::zeros(2, 3)),
            Err(LinalgError::NotSquare { .. })
        ));
        let f = lu_factor(&Matrix::identity(3)).unwrap();
        assert!(matches!(
            f.solve_many(&Matrix::zeros(2, 1)),
            Err(LinalgError::DimensionMismatch { .. })
        ));
    }
}
