//! Restarted GMRES preconditioned by ILU(0).

use super::sparse::SparseMatrix;

/// Incomplete LU factorization on the sparsity pattern of the matrix.
pub struct Ilu0 {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    diag: Vec<usize>,
}

impl Ilu0 {
    pub fn new(a: &SparseMatrix) -> Option<Self> {
        let n = a.nrows();
        let mut row_ptr = vec![0];
        let mut cols = Vec::with_capacity(a.nnz() + n);
        let mut vals = Vec::with_capacity(a.nnz() + n);
        for r in 0..n {
            let (c, v) = a.row(r);
            let mut has_diag = false;
            for (&cc, &vv) in c.iter().zip(v) {
                if cc == r {
                    has_diag = true;
                }
                if !has_diag && cc > r {
                    cols.push(r);
                    vals.push(0.0);
                    has_diag = true;
                }
                cols.push(cc);
                vals.push(vv);
            }
            if !has_diag {
                cols.push(r);
                vals.push(0.0);
            }
            row_ptr.push(cols.len());
        }
        let mut diag = vec![0; n];
        for r in 0..n {
            diag[r] = (row_ptr[r]..row_ptr[r + 1]).find(|&k| cols[k] == r)?;
        }
        let mut pos = vec![usize::MAX; n];
        for i in 0..n {
            for k in row_ptr[i]..row_ptr[i + 1] {
                pos[cols[k]] = k;
            }
            for k in row_ptr[i]..diag[i] {
                let j = cols[k];
                let d = vals[diag[j]];
                if d == 0.0 {
                    return None;
                }
                let l = vals[k] / d;
                vals[k] = l;
                for kk in diag[j] + 1..row_ptr[j + 1] {
                    let p = pos[cols[kk]];
                    if p != usize::MAX {
                        vals[p] -= l * vals[kk];
                    }
                }
            }
            for k in row_ptr[i]..row_ptr[i + 1] {
                pos[cols[k]] = usize::MAX;
            }
            if vals[diag[i]] == 0.0 {
                return None;
            }
        }
        Some(Self {
            n,
            row_ptr,
            cols,
            vals,
            diag,
        })
    }

    pub fn apply(&self, b: &[f64], x: &mut [f64]) {
        for i in 0..self.n {
            let mut s = b[i];
            for k in self.row_ptr[i]..self.diag[i] {
                s -= self.vals[k] * x[self.cols[k]];
            }
            x[i] = s;
        }
        for i in (0..self.n).rev() {
            let mut s = x[i];
            for k in self.diag[i] + 1..self.row_ptr[i + 1] {
                s -= self.vals[k] * x[self.cols[k]];
            }
            x[i] = s / self.vals[self.diag[i]];
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Right-preconditioned restarted GMRES. Returns the solution, the
/// preconditioned-free residual estimate and the iteration count.
pub fn gmres(
    a: &SparseMatrix,
    b: &[f64],
    precond: Option<&Ilu0>,
    tol: f64,
    restart: usize,
    max_iter: usize,
) -> (Vec<f64>, f64, usize) {
    let n = b.len();
    let bnorm = norm(b).max(f64::MIN_POSITIVE);
    let mut x = vec![0.0; n];
    let mut iters = 0;
    let m = restart.max(1);
    let mut z = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    loop {
        a.matvec_into(&x, &mut tmp);
        let r: Vec<f64> = b.iter().zip(&tmp).map(|(b, t)| b - t).collect();
        let beta = norm(&r);
        if beta / bnorm <= tol || iters >= max_iter {
            return (x, beta / bnorm, iters);
        }
        let mut v: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut zs: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut h = vec![vec![0.0; m]; m + 1];
        let mut cs = vec![0.0; m];
        let mut sn = vec![0.0; m];
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut j_done = 0;
        for j in 0..m {
            match precond {
                Some(p) => p.apply(&v[j], &mut z),
                None => z.copy_from_slice(&v[j]),
            }
            zs.push(z.clone());
            a.matvec_into(&z, &mut tmp);
            let mut wv = tmp.clone();
            for i in 0..=j {
                let hij: f64 = wv.iter().zip(&v[i]).map(|(a, b)| a * b).sum();
                h[i][j] = hij;
                for (w, vi) in wv.iter_mut().zip(&v[i]) {
                    *w -= hij * vi;
                }
            }
            let hn = norm(&wv);
            h[j + 1][j] = hn;
            for i in 0..j {
                let t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let d = h[j][j].hypot(h[j + 1][j]);
            cs[j] = if d == 0.0 { 1.0 } else { h[j][j] / d };
            sn[j] = if d == 0.0 { 0.0 } else { h[j + 1][j] / d };
            h[j][j] = d;
            h[j + 1][j] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];
            iters += 1;
            j_done = j + 1;
            if g[j + 1].abs() / bnorm <= tol || hn == 0.0 || iters >= max_iter {
                break;
            }
            v.push(wv.iter().map(|w| w / hn).collect());
        }
        let mut y = vec![0.0; j_done];
        for i in (0..j_done).rev() {
            let mut s = g[i];
            for k in i + 1..j_done {
                s -= h[i][k] * y[k];
            }
            y[i] = s / h[i][i];
        }
        for (k, yk) in y.iter().enumerate() {
            for (xi, zi) in x.iter_mut().zip(&zs[k]) {
                *xi += yk * zi;
            }
        }
    }
}
