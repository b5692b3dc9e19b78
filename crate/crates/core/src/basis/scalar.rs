//! Orthonormal polynomial bases on reference simplices.
//!
//! Functions are built from products of shifted Legendre polynomials in
//! graded order and orthonormalized by a Cholesky factor of their Gram
//! matrix, so the basis of degree `p` is a prefix of the basis of degree
//! `p + 1` and the first function is the normalized constant.

use nalgebra::DMatrix;

use super::quadrature::{legendre_with_derivative, quadrature_rule, reference_measure};
use crate::error::{HdgError, Result};

#[derive(Clone, Debug)]
pub struct ScalarBasis {
    degree: usize,
    dim: usize,
    exponents: Vec<[usize; 3]>,
    /// lower triangular, `phi_i = sum_j coeffs[(i, j)] m_j`
    coeffs: DMatrix<f64>,
}

/// `C(p + d, d)`, the dimension of the polynomials of degree `p` in `d` variables.
pub fn poly_dim(p: usize, d: usize) -> usize {
    let mut num = 1usize;
    let mut den = 1usize;
    for i in 1..=d {
        num *= p + i;
        den *= i;
    }
    num / den
}

fn graded_exponents(p: usize, d: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::with_capacity(poly_dim(p, d));
    for t in 0..=p {
        match d {
            0 => {
                if t == 0 {
                    out.push([0, 0, 0]);
                }
            }
            1 => out.push([t, 0, 0]),
            2 => {
                for a in (0..=t).rev() {
                    out.push([a, t - a, 0]);
                }
            }
            _ => {
                for a in (0..=t).rev() {
                    for b in (0..=t - a).rev() {
                        out.push([a, b, t - a - b]);
                    }
                }
            }
        }
    }
    out
}

impl ScalarBasis {
    pub fn new(dim: usize, degree: usize) -> Result<Self> {
        if dim > 3 {
            return Err(HdgError::InvalidArgument(format!("basis dimension {dim} not supported")));
        }
        let exponents = graded_exponents(degree, dim);
        let n = exponents.len();
        let mut raw = Self {
            degree,
            dim,
            exponents,
            coeffs: DMatrix::identity(n, n),
        };
        if dim == 0 {
            return Ok(raw);
        }
        // two Cholesky passes; the second removes the rounding left by the first
        let rule = quadrature_rule(dim, 2 * degree)?;
        for _ in 0..2 {
            let mut gram = DMatrix::zeros(n, n);
            for (p, &w) in rule.points.iter().zip(&rule.weights) {
                let v = raw.eval(&p[..dim]);
                for i in 0..n {
                    for j in 0..=i {
                        gram[(i, j)] += w * v[i] * v[j];
                    }
                }
            }
            for i in 0..n {
                for j in 0..i {
                    gram[(j, i)] = gram[(i, j)];
                }
            }
            let chol = gram
                .cholesky()
                .ok_or_else(|| HdgError::Numerical("basis Gram matrix is not positive definite".into()))?;
            let linv = chol
                .l()
                .solve_lower_triangular(&DMatrix::identity(n, n))
                .ok_or_else(|| HdgError::Numerical("basis Gram factor is singular".into()))?;
            raw.coeffs = linv * &raw.coeffs;
        }
        Ok(raw)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    fn raw_values(&self, xi: &[f64], out: &mut [f64]) {
        let mut leg = [[0.0; 32]; 3];
        for d in 0..self.dim {
            for a in 0..=self.degree {
                leg[d][a] = legendre_with_derivative(a, 2.0 * xi[d] - 1.0).0;
            }
        }
        for (o, e) in out.iter_mut().zip(&self.exponents) {
            *o = (0..self.dim).map(|d| leg[d][e[d]]).product();
        }
        if self.dim == 0 {
            out[0] = 1.0;
        }
    }

    fn raw_values_and_gradients(&self, xi: &[f64], val: &mut [f64], grad: &mut [[f64; 3]]) {
        let mut leg = [[0.0; 32]; 3];
        let mut dleg = [[0.0; 32]; 3];
        for d in 0..self.dim {
            for a in 0..=self.degree {
                let (p, dp) = legendre_with_derivative(a, 2.0 * xi[d] - 1.0);
                leg[d][a] = p;
                dleg[d][a] = 2.0 * dp;
            }
        }
        for (i, e) in self.exponents.iter().enumerate() {
            val[i] = (0..self.dim).map(|d| leg[d][e[d]]).product();
            let mut g = [0.0; 3];
            for (dd, gd) in g.iter_mut().enumerate().take(self.dim) {
                *gd = (0..self.dim)
                    .map(|d| if d == dd { dleg[d][e[d]] } else { leg[d][e[d]] })
                    .product();
            }
            grad[i] = g;
        }
        if self.dim == 0 {
            val[0] = 1.0;
        }
    }

    /// Values of all basis functions at a reference point.
    pub fn eval(&self, xi: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut m = vec![0.0; n];
        self.raw_values(xi, &mut m);
        (0..n)
            .map(|i| (0..=i).map(|j| self.coeffs[(i, j)] * m[j]).sum())
            .collect()
    }

    /// Values and reference gradients of all basis functions at a point.
    pub fn eval_with_gradients(&self, xi: &[f64]) -> (Vec<f64>, Vec<[f64; 3]>) {
        let n = self.len();
        let mut m = vec![0.0; n];
        let mut dm = vec![[0.0; 3]; n];
        self.raw_values_and_gradients(xi, &mut m, &mut dm);
        let mut val = vec![0.0; n];
        let mut grad = vec![[0.0; 3]; n];
        for i in 0..n {
            for j in 0..=i {
                let c = self.coeffs[(i, j)];
                val[i] += c * m[j];
                for d in 0..3 {
                    grad[i][d] += c * dm[j][d];
                }
            }
        }
        (val, grad)
    }
}

/// Values and gradients of a basis at a list of reference points, flattened
/// point-major: entry `q * n + i` belongs to function `i` at point `q`.
pub fn eval_scalar_basis(basis: &ScalarBasis, points: &[[f64; 3]]) -> (Vec<f64>, Vec<[f64; 3]>) {
    let n = basis.len();
    let mut values = Vec::with_capacity(points.len() * n);
    let mut grads = Vec::with_capacity(points.len() * n);
    for p in points {
        let (v, g) = basis.eval_with_gradients(&p[..basis.dim()]);
        values.extend(v);
        grads.extend(g);
    }
    (values, grads)
}

pub fn reference_constant(dim: usize) -> f64 {
    1.0 / reference_measure(dim).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn counts() {
        for d in 1..=3 {
            for p in 0..=4 {
                assert_eq!(ScalarBasis::new(d, p).unwrap().len(), poly_dim(p, d));
            }
        }
        assert_eq!(poly_dim(2, 3), 10);
    }

    #[test]
    fn constant_value() {
        for d in 1..=3 {
            let b = ScalarBasis::new(d, 0).unwrap();
            let v = b.eval(&[0.1, 0.2, 0.3][..d]);
            assert!((v[0] - reference_constant(d)).abs() < 1e-14);
        }
    }

    #[test]
    fn orthonormal() {
        for d in 1..=3 {
            for p in 0..=3 {
                let b = ScalarBasis::new(d, p).unwrap();
                let rule = quadrature_rule(d, 2 * p + 2).unwrap();
                let n = b.len();
                let mut g = vec![0.0; n * n];
                for (x, w) in rule.points.iter().zip(&rule.weights) {
                    let v = b.eval(&x[..d]);
                    for i in 0..n {
                        for j in 0..n {
                            g[i * n + j] += w * v[i] * v[j];
                        }
                    }
                }
                for i in 0..n {
                    for j in 0..n {
                        let e = if i == j { 1.0 } else { 0.0 };
                        assert!((g[i * n + j] - e).abs() < 1e-12, "d {d} p {p} ({i},{j})");
                    }
                }
            }
        }
    }

    #[test]
    fn hierarchical_prefix() {
        let lo = ScalarBasis::new(2, 1).unwrap();
        let hi = ScalarBasis::new(2, 3).unwrap();
        let x = [0.21, 0.37];
        let (a, b) = (lo.eval(&x), hi.eval(&x));
        for i in 0..lo.len() {
            assert!((a[i] - b[i]).abs() < 1e-12);
        }
    }

    fn fd_check(d: usize, p: usize, xi: [f64; 3]) -> f64 {
        let b = ScalarBasis::new(d, p).unwrap();
        let (_, g) = b.eval_with_gradients(&xi[..d]);
        let h = 1e-6;
        let mut err: f64 = 0.0;
        for k in 0..d {
            let mut xp = xi;
            let mut xm = xi;
            xp[k] += h;
            xm[k] -= h;
            let (vp, vm) = (b.eval(&xp[..d]), b.eval(&xm[..d]));
            for i in 0..b.len() {
                err = err.max(((vp[i] - vm[i]) / (2.0 * h) - g[i][k]).abs());
            }
        }
        err
    }

    #[test]
    fn gradient_fd_k2_triangle() {
        assert!(fd_check(2, 2, [0.2, 0.3, 0.0]) < 1e-6);
    }

    proptest! {
        #[test]
        fn gradients_match_finite_differences(a in 0.05f64..0.9, b in 0.05f64..0.9, c in 0.05f64..0.9, p in 0usize..4, d in 1usize..4) {
            // push the point inside the simplex
            let s = a + if d > 1 { b } else { 0.0 } + if d > 2 { c } else { 0.0 };
            let f = if s > 0.95 { 0.9 / s } else { 1.0 };
            prop_assert!(fd_check(d, p, [a * f, b * f, c * f]) < 1e-6);
        }
    }
}
