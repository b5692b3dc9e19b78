//! Quadrature on reference simplices by collapsed (Duffy) tensor products of
//! Gauss-Legendre rules. Exact for polynomials of the requested total degree.

use crate::error::{HdgError, Result};

/// Highest exactness degree served by [`quadrature_rule`].
pub const MAX_DEGREE: usize = 40;

/// Rule on the reference simplex `{xi_i >= 0, sum xi_i <= 1}`.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub dim: usize,
    pub degree: usize,
    /// reference coordinates `xi`, `dim` entries per point
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Barycentric coordinates `(1 - sum xi, xi_1, ..., xi_dim)` of point `q`.
    pub fn barycentric(&self, q: usize) -> Vec<f64> {
        let xi = &self.points[q][..self.dim];
        let mut b = Vec::with_capacity(self.dim + 1);
        b.push(1.0 - xi.iter().sum::<f64>());
        b.extend_from_slice(xi);
        b
    }
}

pub fn reference_measure(dim: usize) -> f64 {
    match dim {
        0 => 1.0,
        1 => 1.0,
        2 => 0.5,
        _ => 1.0 / 6.0,
    }
}

/// Rule of exactness `degree` on the reference simplex of dimension `dim`.
pub fn quadrature_rule(dim: usize, degree: usize) -> Result<QuadratureRule> {
    if degree > MAX_DEGREE {
        return Err(HdgError::Capability(format!(
            "quadrature degree {degree} exceeds the supported maximum {MAX_DEGREE}"
        )));
    }
    let mut points = Vec::new();
    let mut weights = Vec::new();
    match dim {
        1 => {
            let (x, w) = gauss_legendre_unit(degree / 2 + 1);
            for i in 0..x.len() {
                points.push([x[i], 0.0, 0.0]);
                weights.push(w[i]);
            }
        }
        2 => {
            // xi1 = a, xi2 = (1 - a) b, jacobian (1 - a)
            let (xa, wa) = gauss_legendre_unit(degree.div_ceil(2) + 1);
            let (xb, wb) = gauss_legendre_unit(degree / 2 + 1);
            for i in 0..xa.len() {
                for j in 0..xb.len() {
                    let a = xa[i];
                    points.push([a, (1.0 - a) * xb[j], 0.0]);
                    weights.push(wa[i] * wb[j] * (1.0 - a));
                }
            }
        }
        3 => {
            // xi1 = a, xi2 = (1 - a) b, xi3 = (1 - a)(1 - b) c,
            // jacobian (1 - a)^2 (1 - b)
            let (xa, wa) = gauss_legendre_unit((degree + 2) / 2 + 1);
            let (xb, wb) = gauss_legendre_unit(degree.div_ceil(2) + 1);
            let (xc, wc) = gauss_legendre_unit(degree / 2 + 1);
            for i in 0..xa.len() {
                for j in 0..xb.len() {
                    for l in 0..xc.len() {
                        let (a, b, c) = (xa[i], xb[j], xc[l]);
                        points.push([a, (1.0 - a) * b, (1.0 - a) * (1.0 - b) * c]);
                        weights.push(wa[i] * wb[j] * wc[l] * (1.0 - a) * (1.0 - a) * (1.0 - b));
                    }
                }
            }
        }
        _ => {
            return Err(HdgError::InvalidArgument(format!(
                "quadrature dimension {dim} not supported"
            )))
        }
    }
    Ok(QuadratureRule {
        dim,
        degree,
        points,
        weights,
    })
}

/// `n`-point Gauss-Legendre rule mapped to `[0, 1]`.
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    (
        x.iter().map(|t| 0.5 * (t + 1.0)).collect(),
        w.iter().map(|v| 0.5 * v).collect(),
    )
}

/// `n`-point Gauss-Legendre rule on `[-1, 1]` by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, t);
            dp = d;
            let dt = p / d;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, t);
        dp = if d != 0.0 { d } else { dp };
        let wi = 2.0 / ((1.0 - t * t) * dp * dp);
        x[i] = -t;
        x[n - 1 - i] = t;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// `(P_n(t), P_n'(t))`.
pub fn legendre_with_derivative(n: usize, t: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, t);
    let (mut d0, mut d1) = (0.0, 1.0);
    for m in 2..=n {
        let mf = m as f64;
        let p2 = ((2.0 * mf - 1.0) * t * p1 - (mf - 1.0) * p0) / mf;
        let d2 = d0 + (2.0 * mf - 1.0) * p1;
        p0 = p1;
        p1 = p2;
        d0 = d1;
        d1 = d2;
    }
    (p1, d1)
}
