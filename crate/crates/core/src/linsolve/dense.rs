//! Dense LU factorization with partial pivoting.

use nalgebra::DMatrix;

use crate::error::{HdgError, Result};

/// Pivots below this fraction of the largest entry of their original row are
/// treated as zero.
pub const PIVOT_TOLERANCE: f64 = 1e-14;

#[derive(Clone, Debug)]
pub struct DenseLu {
    lu: DMatrix<f64>,
    perm: Vec<usize>,
    max_pivot: f64,
    min_pivot: f64,
}

impl DenseLu {
    pub fn factor(a: &DMatrix<f64>) -> Result<Self> {
        Self::factor_with_tolerance(a, PIVOT_TOLERANCE)
    }

    pub fn factor_with_tolerance(a: &DMatrix<f64>, tol: f64) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(HdgError::InvalidArgument(format!(
                "LU needs a square matrix, got {}x{}",
                n,
                a.ncols()
            )));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(HdgError::Numerical("matrix has non-finite entries".into()));
        }
        let row_max: Vec<f64> = (0..n).map(|i| a.row(i).amax()).collect();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut max_pivot: f64 = 0.0;
        let mut min_pivot = f64::INFINITY;
        for k in 0..n {
            let mut p = k;
            let mut best = lu[(k, k)].abs();
            for i in k + 1..n {
                let v = lu[(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            let scale = row_max[perm[p]];
            if best <= tol * scale || best == 0.0 {
                return Err(HdgError::SingularMatrix {
                    column: k,
                    pivot: best,
                    tolerance: tol * scale,
                });
            }
            if p != k {
                lu.swap_rows(p, k);
                perm.swap(p, k);
            }
            max_pivot = max_pivot.max(best);
            min_pivot = min_pivot.min(best);
            let piv = lu[(k, k)];
            for i in k + 1..n {
                let l = lu[(i, k)] / piv;
                lu[(i, k)] = l;
                if l != 0.0 {
                    for j in k + 1..n {
                        let u = lu[(k, j)];
                        lu[(i, j)] -= l * u;
                    }
                }
            }
        }
        Ok(Self {
            lu,
            perm,
            max_pivot,
            min_pivot,
        })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Ratio of the largest to the smallest pivot, a cheap conditioning hint.
    pub fn pivot_ratio(&self) -> f64 {
        if self.perm.is_empty() {
            1.0
        } else {
            self.max_pivot / self.min_pivot
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        x
    }

    /// Solves for every column of `b`.
    pub fn solve_matrix(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(b.nrows(), b.ncols());
        for j in 0..b.ncols() {
            let col: Vec<f64> = b.column(j).iter().cloned().collect();
            out.set_column(j, &nalgebra::DVector::from_vec(self.solve(&col)));
        }
        out
    }
}

pub fn dense_lu_solve(a: &DMatrix<f64>, b: &[f64]) -> Result<Vec<f64>> {
    Ok(DenseLu::factor(a)?.solve(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity() {
        let a = DMatrix::identity(4, 4);
        let b = [1.0, -2.0, 3.5, 0.25];
        assert_eq!(dense_lu_solve(&a, &b).unwrap(), b.to_vec());
    }

    #[test]
    fn two_by_two() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]);
        let x = dense_lu_solve(&a, &[3.0, 4.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn random_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 50;
        let mut a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        for i in 0..n {
            a[(i, i)] += 10.0;
        }
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let x = dense_lu_solve(&a, &b).unwrap();
        let r = &a * nalgebra::DVector::from_vec(x) - nalgebra::DVector::from_vec(b.clone());
        let bn = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(r.norm() / bn < 1e-12);
    }

    #[test]
    fn singular_is_reported() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(DenseLu::factor(&a), Err(HdgError::SingularMatrix { column: 1, .. })));
    }

    #[test]
    fn needs_pivoting() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert_eq!(dense_lu_solve(&a, &[2.0, 3.0]).unwrap(), vec![3.0, 2.0]);
    }
}
