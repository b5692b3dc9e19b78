//! Orthonormal bases of `curl P_{k+1}(T)` and `grad P_{k+2}(T)` on a physical
//! element, used as test spaces of the curl-fit postprocessing.

use nalgebra::DMatrix;

use super::quadrature::quadrature_rule;
use super::scalar::ScalarBasis;
use super::{curl_components, curl_of_component};
use crate::error::{HdgError, Result};
use crate::mesh::ElementGeometry;
use crate::vecops::{self, Vec3};

const DROP_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct CurlRangeBasis {
    pub dim: usize,
    pub k: usize,
    /// each entry: coefficients in the orthonormal `P_k^{cw}` basis, index `a * nb_k + j`
    pub curl: Vec<Vec<f64>>,
    /// each entry: coefficients in the orthonormal `P_{k+1}^d` basis, index `c * nb_{k+1} + i`
    pub grad: Vec<Vec<f64>>,
    /// curls of the `P_{k+1}^d` basis in the `P_k^{cw}` basis (columns)
    pub curl_matrix: DMatrix<f64>,
}

struct PhysicalEval {
    values: Vec<Vec<f64>>,
    grads: Vec<Vec<Vec3>>,
}

fn tabulate(basis: &ScalarBasis, geo: &ElementGeometry, points: &[[f64; 3]]) -> PhysicalEval {
    let s = 1.0 / geo.det.abs().sqrt();
    let mut values = Vec::with_capacity(points.len());
    let mut grads = Vec::with_capacity(points.len());
    for p in points {
        let (v, g) = basis.eval_with_gradients(&p[..geo.dim]);
        values.push(v.into_iter().map(|v| v * s).collect());
        grads.push(g.iter().map(|g| vecops::scale(s, &geo.push_gradient(&g[..geo.dim]))).collect());
    }
    PhysicalEval { values, grads }
}

fn range_columns(m: &DMatrix<f64>) -> (Vec<Vec<f64>>, usize) {
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let mut cols = Vec::new();
    for (j, &s) in svd.singular_values.iter().enumerate() {
        if s > DROP_TOLERANCE * smax {
            cols.push(u.column(j).iter().cloned().collect());
        }
    }
    let rank = cols.len();
    (cols, rank)
}

/// Builds both families on the element with geometry `geo`.
pub fn build_curl_range_basis(dim: usize, k: usize, geo: &ElementGeometry) -> Result<CurlRangeBasis> {
    if !(2..=3).contains(&dim) {
        return Err(HdgError::InvalidArgument(format!("curl range basis needs dim 2 or 3, got {dim}")));
    }
    let lo = ScalarBasis::new(dim, k)?;
    let hi = ScalarBasis::new(dim, k + 1)?;
    let top = ScalarBasis::new(dim, k + 2)?;
    let rule = quadrature_rule(dim, 2 * k + 4)?;
    let det = geo.det.abs();
    let tlo = tabulate(&lo, geo, &rule.points);
    let thi = tabulate(&hi, geo, &rule.points);
    let ttop = tabulate(&top, geo, &rule.points);
    let cw = curl_components(dim);
    let (nlo, nhi, ntop) = (lo.len(), hi.len(), top.len());

    let mut curl_matrix = DMatrix::zeros(cw * nlo, dim * nhi);
    let mut grad_matrix = DMatrix::zeros(dim * nhi, ntop - 1);
    for (q, w0) in rule.weights.iter().enumerate() {
        let w = w0 * det;
        for c in 0..dim {
            for i in 0..nhi {
                let curl = curl_of_component(&thi.grads[q][i], c, dim);
                for a in 0..cw {
                    for j in 0..nlo {
                        curl_matrix[(a * nlo + j, c * nhi + i)] += w * tlo.values[q][j] * curl[a];
                    }
                }
                for j in 1..ntop {
                    grad_matrix[(c * nhi + i, j - 1)] += w * thi.values[q][i] * ttop.grads[q][j][c];
                }
            }
        }
    }

    let (curl, _) = range_columns(&curl_matrix);
    let (grad, grank) = range_columns(&grad_matrix);
    if grank != ntop - 1 {
        return Err(HdgError::Numerical(format!(
            "gradient family has rank {grank}, expected {}",
            ntop - 1
        )));
    }
    if curl.len() + grad.len() != dim * nhi {
        return Err(HdgError::Numerical(format!(
            "curl range ({}) and gradient ({}) families do not span P_{}^{dim} ({})",
            curl.len(),
            grad.len(),
            k + 1,
            dim * nhi
        )));
    }
    Ok(CurlRangeBasis {
        dim,
        k,
        curl,
        grad,
        curl_matrix,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::poly_dim;
    use crate::mesh::build_unit_cube_mesh;

    fn reference(dim: usize) -> ElementGeometry {
        let mut v = vec![[0.0; 3]];
        for i in 0..dim {
            let mut e = [0.0; 3];
            e[i] = 1.0;
            v.push(e);
        }
        ElementGeometry::new(dim, &v)
    }

    fn binom(n: usize, r: usize) -> usize {
        poly_dim(n - r, r)
    }

    #[test]
    fn dimension_counts() {
        let b = build_curl_range_basis(3, 0, &reference(3)).unwrap();
        assert_eq!(b.grad.len(), 9);
        assert_eq!(b.curl.len(), 3);
        let b = build_curl_range_basis(2, 0, &reference(2)).unwrap();
        assert_eq!(b.curl.len(), 1);
        assert_eq!(b.grad.len(), 5);
        for k in 0..3 {
            let b = build_curl_range_basis(2, k, &reference(2)).unwrap();
            assert_eq!(b.curl.len(), poly_dim(k, 2));
            let b = build_curl_range_basis(3, k, &reference(3)).unwrap();
            assert_eq!(b.curl.len(), 3 * binom(k + 4, 3) - binom(k + 5, 3) + 1);
        }
    }

    #[test]
    fn gradient_family_is_curl_free_and_orthonormal() {
        let mesh = build_unit_cube_mesh(2).unwrap();
        for k in 0..2 {
            let b = build_curl_range_basis(3, k, mesh.geometry(13)).unwrap();
            for g in &b.grad {
                let v = nalgebra::DVector::from_column_slice(g);
                assert!((&b.curl_matrix * &v).amax() < 1e-12);
            }
            for (i, a) in b.grad.iter().chain(&b.curl).enumerate() {
                let na: f64 = a.iter().map(|x| x * x).sum();
                assert!((na - 1.0).abs() < 1e-12, "family member {i}");
            }
        }
    }
}
