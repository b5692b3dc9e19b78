//! Dense local factorizations and the sparse solve of the trace system.

mod dense;
mod gmres;
mod sparse;

pub use dense::{dense_lu_solve, DenseLu, PIVOT_TOLERANCE};
pub use gmres::{gmres, Ilu0};
pub use sparse::SparseMatrix;

use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use serde::{Deserialize, Serialize};

use crate::error::{HdgError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SolverMethod {
    /// sparse LU with a fill-reducing ordering
    #[default]
    Direct,
    /// restarted GMRES with ILU(0)
    Iterative,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveOptions {
    pub method: SolverMethod,
    pub tolerance: f64,
    pub restart: usize,
    pub max_iterations: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            method: SolverMethod::Direct,
            tolerance: 1e-10,
            restart: 100,
            max_iterations: 20_000,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    pub method: SolverMethod,
    /// `||A x - b|| / ||b||`, recomputed after the solve
    pub residual: f64,
    pub iterations: Option<usize>,
    /// stored entries of the system matrix
    pub nnz: usize,
    pub unknowns: usize,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn relative_residual(a: &SparseMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.matvec(x);
    let r: Vec<f64> = ax.iter().zip(b).map(|(a, b)| a - b).collect();
    let bn = norm(b);
    if bn == 0.0 {
        norm(&r)
    } else {
        norm(&r) / bn
    }
}

fn direct_solve(a: &SparseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.nrows();
    let triplets: Vec<Triplet<usize, usize, f64>> = a.iter().map(|(r, c, v)| Triplet::new(r, c, v)).collect();
    let m = SparseColMat::<usize, f64>::try_new_from_triplets(n, a.ncols(), &triplets)
        .map_err(|e| HdgError::Solver {
            reason: format!("could not build sparse matrix: {e:?}"),
            report: None,
        })?;
    let lu = m.sp_lu().map_err(|e| HdgError::Solver {
        reason: format!("sparse LU failed: {e:?}"),
        report: None,
    })?;
    let mut rhs = Mat::<f64>::from_fn(n, 1, |i, _| b[i]);
    lu.solve_in_place(rhs.as_mut());
    Ok((0..n).map(|i| rhs[(i, 0)]).collect())
}

/// Solves `A x = b`. The residual in the report is recomputed from scratch;
/// results above the tolerance are returned as solver errors.
pub fn sparse_solve(a: &SparseMatrix, b: &[f64], options: &SolveOptions) -> Result<(Vec<f64>, SolveReport)> {
    if a.nrows() != a.ncols() || a.nrows() != b.len() {
        return Err(HdgError::InvalidArgument(format!(
            "system is {}x{} with rhs of length {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    let n = b.len();
    let (x, iterations, claimed) = match options.method {
        SolverMethod::Direct => {
            faer::set_global_parallelism(faer::Par::Seq);
            (direct_solve(a, b)?, None, None)
        }
        SolverMethod::Iterative => {
            let ilu = Ilu0::new(a);
            let (x, res, it) = gmres(a, b, ilu.as_ref(), options.tolerance, options.restart, options.max_iterations);
            (x, Some(it), Some(res))
        }
    };
    let residual = relative_residual(a, &x, b);
    let report = SolveReport {
        method: options.method,
        residual,
        iterations,
        nnz: a.nnz(),
        unknowns: n,
    };
    if x.iter().any(|v| !v.is_finite()) {
        return Err(HdgError::Solver {
            reason: "solution has non-finite entries".into(),
            report: Some(report),
        });
    }
    if let Some(c) = claimed {
        let floor = 1e-3 * options.tolerance;
        if residual.max(floor) > 10.0 * c.max(floor) || c.max(floor) > 10.0 * residual.max(floor) {
            return Err(HdgError::Numerical(format!(
                "iterative residual estimate {c:.3e} disagrees with recomputed {residual:.3e}"
            )));
        }
    }
    if residual > options.tolerance {
        return Err(HdgError::Solver {
            reason: format!("relative residual {residual:.3e} above tolerance {:.1e}", options.tolerance),
            report: Some(report),
        });
    }
    log::debug!(
        "trace solve: {n} unknowns, {} nonzeros, residual {residual:.2e}",
        a.nnz()
    );
    Ok((x, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_division() {
        let a = SparseMatrix::diagonal(&[2.0, 4.0, -5.0]);
        let (x, rep) = sparse_solve(&a, &[1.0, 1.0, 10.0], &SolveOptions::default()).unwrap();
        assert_eq!(x, vec![0.5, 0.25, -2.0]);
        assert!(rep.residual < 1e-15);
    }

    #[test]
    fn direct_matches_dense_and_iterative() {
        let n = 30;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 3.0 + i as f64 * 0.01));
            t.push((i, (i + 7) % n, -1.0));
            t.push(((i + 3) % n, i, 0.5));
        }
        let a = SparseMatrix::from_triplets(n, n, t);
        let b: Vec<f64> = (0..n).map(|i| (i as f64).cos()).collect();
        let dense = dense_lu_solve(&a.to_dense(), &b).unwrap();
        let (x, _) = sparse_solve(&a, &b, &SolveOptions::default()).unwrap();
        let opts = SolveOptions {
            method: SolverMethod::Iterative,
            tolerance: 1e-13,
            ..Default::default()
        };
        let (y, rep) = sparse_solve(&a, &b, &opts).unwrap();
        assert!(rep.iterations.is_some());
        for i in 0..n {
            assert!((x[i] - dense[i]).abs() < 1e-12);
            assert!((y[i] - dense[i]).abs() < 1e-11);
        }
    }

    #[test]
    fn singular_system_fails() {
        let a = SparseMatrix::from_triplets(2, 2, vec![(0, 0, 1.0), (1, 0, 1.0)]);
        assert!(sparse_solve(&a, &[1.0, 1.0], &SolveOptions::default()).is_err());
    }

    #[test]
    fn direct_path_is_deterministic() {
        let n = 40;
        let t: Vec<_> = (0..n)
            .flat_map(|i| [(i, i, 2.0), (i, (i * 5 + 1) % n, 0.3), ((i * 3) % n, i, -0.7)])
            .collect();
        let a = SparseMatrix::from_triplets(n, n, t);
        let b: Vec<f64> = (0..n).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let (x1, _) = sparse_solve(&a, &b, &SolveOptions::default()).unwrap();
        let (x2, _) = sparse_solve(&a, &b, &SolveOptions::default()).unwrap();
        assert_eq!(x1, x2);
    }
}
