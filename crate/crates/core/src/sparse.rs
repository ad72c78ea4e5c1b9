//! Minimal sparse symmetric linear algebra: CSR storage, matrix-vector
//! products, and a Jacobi-preconditioned conjugate gradient solver.
//!
//! This is deliberately small: the assembled P1 Laplace systems are SPD
//! after Dirichlet elimination and never exceed desk scale, so CG with
//! diagonal preconditioning is enough. No reordering, no drop tolerances.

use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum SparseError {
    #[error("triplet index ({row}, {col}) out of range for dimension {n}")]
    IndexOutOfRange { row: usize, col: usize, n: usize },
    #[error("vector length {got} does not match matrix dimension {want}")]
    DimensionMismatch { got: usize, want: usize },
}

/// Compressed sparse row matrix with sorted, unique column indices per row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    n: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<T>,
}

impl<T: Real> CsrMatrix<T> {
    /// Builds an `n x n` matrix from coordinate triplets. Duplicate entries
    /// are summed; entries that cancel to zero are kept.
    pub fn from_triplets(
        n: usize,
        entries: &[(usize, usize, T)],
    ) -> Result<Self, SparseError> {
        for &(row, col, _) in entries {
            if row >= n || col >= n {
                return Err(SparseError::IndexOutOfRange { row, col, n });
            }
        }
        let mut sorted: Vec<(usize, usize, T)> = entries.to_vec();
        sorted.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));

        let mut counts = vec![0usize; n];
        let mut col_indices: Vec<usize> = Vec::with_capacity(sorted.len());
        let mut values: Vec<T> = Vec::with_capacity(sorted.len());
        let mut prev: Option<(usize, usize)> = None;
        for &(row, col, v) in &sorted {
            if prev == Some((row, col)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_indices.push(col);
                values.push(v);
                counts[row] += 1;
                prev = Some((row, col));
            }
        }
        let mut row_offsets = vec![0usize; n + 1];
        for row in 0..n {
            row_offsets[row + 1] = row_offsets[row] + counts[row];
        }
        Ok(CsrMatrix {
            n,
            row_offsets,
            col_indices,
            values,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.col_indices.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Iterates over the `(col, value)` pairs of one row.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let lo = self.row_offsets[i];
        let hi = self.row_offsets[i + 1];
        self.col_indices[lo..hi]
            .iter()
            .copied()
            .zip(self.values[lo..hi].iter().copied())
    }

    /// y = A x
    pub fn spmv(&self, x: &[T]) -> Result<Vec<T>, SparseError> {
        if x.len() != self.n {
            return Err(SparseError::DimensionMismatch {
                got: x.len(),
                want: self.n,
            });
        }
        let mut y = vec![T::zero(); self.n];
        for i in 0..self.n {
            let mut acc = T::zero();
            for (c, v) in self.row(i) {
                acc += v * x[c];
            }
            y[i] = acc;
        }
        Ok(y)
    }

    /// Main diagonal, zeros where absent.
    pub fn diagonal(&self) -> Vec<T> {
        let mut d = vec![T::zero(); self.n];
        for i in 0..self.n {
            for (c, v) in self.row(i) {
                if c == i {
                    d[i] = v;
                }
            }
        }
        d
    }

    /// Largest absolute asymmetry |A - A^T|_max; zero for exactly symmetric
    /// storage.
    pub fn max_asymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                let mut vt = T::zero();
                for (c, w) in self.row(j) {
                    if c == i {
                        vt = w;
                    }
                }
                let d = (v - vt).abs();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }
}

/// Outcome of an iterative solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport<T> {
    pub iterations: usize,
    pub relative_residual: T,
    pub converged: bool,
}

/// Jacobi-preconditioned conjugate gradient for SPD systems.
///
/// Returns the iterate together with a report; non-convergence within
/// `max_iter` is reported, not an error, so the caller decides. A zero
/// right-hand side short-circuits to the zero solution.
pub fn conjugate_gradient<T: Real>(
    a: &CsrMatrix<T>,
    b: &[T],
    tol: T,
    max_iter: usize,
) -> Result<(Vec<T>, SolveReport<T>), SparseError> {
    if b.len() != a.n() {
        return Err(SparseError::DimensionMismatch {
            got: b.len(),
            want: a.n(),
        });
    }
    let n = a.n();
    let b_norm = norm2(b);
    if b_norm == T::zero() {
        return Ok((
            vec![T::zero(); n],
            SolveReport {
                iterations: 0,
                relative_residual: T::zero(),
                converged: true,
            },
        ));
    }

    let inv_diag: Vec<T> = a
        .diagonal()
        .into_iter()
        .map(|d| if d > T::zero() { d.recip() } else { T::one() })
        .collect();

    let mut x = vec![T::zero(); n];
    let mut r = b.to_vec();
    let mut z: Vec<T> = r.iter().zip(&inv_diag).map(|(&ri, &di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);

    let mut iterations = 0;
    let mut converged = false;
    let mut rel = norm2(&r) / b_norm;

    for k in 1..=max_iter {
        let ap = a.spmv(&p)?;
        let pap = dot(&p, &ap);
        if !(pap > T::zero()) {
            // loss of positive-definiteness; give up with the current iterate
            iterations = k - 1;
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        iterations = k;
        rel = norm2(&r) / b_norm;
        if rel <= tol {
            converged = true;
            break;
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }

    Ok((
        x,
        SolveReport {
            iterations,
            relative_residual: rel,
            converged,
        },
    ))
}

pub(crate) fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub(crate) fn norm2<T: Real>(v: &[T]) -> T {
    dot(v, v).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_duplicates() {
        let a = CsrMatrix::from_triplets(2, &[(0, 0, 1.0), (0, 0, 1.0)]).unwrap();
        assert_eq!(a.nnz(), 1);
        assert_eq!(a.values(), &[2.0]);
        assert_eq!(a.spmv(&[3.0, 5.0]).unwrap(), vec![6.0, 0.0]);
    }

    #[test]
    fn empty_matrix_gives_zero_product() {
        let a = CsrMatrix::<f64>::from_triplets(2, &[]).unwrap();
        assert_eq!(a.nnz(), 0);
        assert_eq!(a.spmv(&[1.0, -4.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn out_of_range_triplet_rejected() {
        let err = CsrMatrix::from_triplets(2, &[(2, 0, 1.0)]).unwrap_err();
        assert!(matches!(err, SparseError::IndexOutOfRange { row: 2, .. }));
    }

    #[test]
    fn rows_sorted_and_unique() {
        let a = CsrMatrix::from_triplets(
            3,
            &[(1, 2, 1.0), (1, 0, 2.0), (1, 2, 0.5), (0, 1, -1.0)],
        )
        .unwrap();
        assert_eq!(a.row_offsets(), &[0, 1, 3, 3]);
        assert_eq!(a.col_indices(), &[1, 0, 2]);
        assert_eq!(a.values(), &[-1.0, 2.0, 1.5]);
    }

    #[test]
    fn cg_identity_converges_in_one_iteration() {
        let a = CsrMatrix::<f64>::from_triplets(
            4,
            &[(0, 0, 1.0), (1, 1, 1.0), (2, 2, 1.0), (3, 3, 1.0)],
        )
        .unwrap();
        let b = [1.0, -2.0, 3.0, 0.25];
        let (x, report) = conjugate_gradient(&a, &b, 1e-12, 10).unwrap();
        assert!(report.converged);
        assert!(report.iterations <= 1);
        for (xi, bi) in x.iter().zip(&b) {
            assert!((xi - bi).abs() < 1e-12);
        }
    }

    #[test]
    fn cg_two_by_two_matches_direct_solve() {
        // A = [[4,1],[1,3]], b = (1,2): x = (1/11, 7/11) by Cramer's rule.
        let a = CsrMatrix::<f64>::from_triplets(
            2,
            &[(0, 0, 4.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 3.0)],
        )
        .unwrap();
        let (x, report) = conjugate_gradient(&a, &[1.0, 2.0], 1e-14, 20).unwrap();
        assert!(report.converged);
        assert!((x[0] - 1.0 / 11.0).abs() < 1e-10);
        assert!((x[1] - 7.0 / 11.0).abs() < 1e-10);
    }

    #[test]
    fn cg_zero_rhs_short_circuits() {
        let a = CsrMatrix::from_triplets(3, &[(0, 0, 2.0), (1, 1, 2.0), (2, 2, 2.0)]).unwrap();
        let (x, report) = conjugate_gradient(&a, &[0.0, 0.0, 0.0], 1e-12, 10).unwrap();
        assert_eq!(report.iterations, 0);
        assert!(report.converged);
        assert_eq!(x, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn cg_works_in_f32() {
        let a = CsrMatrix::<f32>::from_triplets(
            2,
            &[(0, 0, 4.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 3.0)],
        )
        .unwrap();
        let (x, report) = conjugate_gradient(&a, &[1.0f32, 2.0], 1e-6, 20).unwrap();
        assert!(report.converged);
        assert!((x[0] - 1.0 / 11.0).abs() < 1e-5);
        assert!((x[1] - 7.0 / 11.0).abs() < 1e-5);
    }
}
