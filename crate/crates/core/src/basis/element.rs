//! Physical tabulations of orthonormal bases on mesh elements and facets.

use super::quadrature::{quadrature_rule, reference_measure, QuadratureRule};
use super::scalar::ScalarBasis;
use crate::error::Result;
use crate::mesh::{ElementGeometry, Mesh};
use crate::vecops::{self, Vec3};

/// Element and facet bases of one degree together with the quadrature rules
/// used to integrate against them.
#[derive(Clone, Debug)]
pub struct ReferenceSpace {
    pub dim: usize,
    pub degree: usize,
    pub basis: ScalarBasis,
    pub facet_basis: ScalarBasis,
    pub element_rule: QuadratureRule,
    pub facet_rule: QuadratureRule,
    ref_values: Vec<f64>,
    ref_grads: Vec<[f64; 3]>,
    facet_values: Vec<f64>,
}

/// Basis data on one element at its quadrature points. Values are scaled so
/// the functions are orthonormal on the physical element.
#[derive(Clone, Debug)]
pub struct ElementTab {
    pub element: usize,
    pub nb: usize,
    pub x: Vec<Vec3>,
    pub w: Vec<f64>,
    /// `phi[q * nb + i]`
    pub phi: Vec<f64>,
    pub grad: Vec<Vec3>,
}

/// Basis data on one local facet of an element.
#[derive(Clone, Debug)]
pub struct FacetTab {
    pub facet: usize,
    pub local: usize,
    pub boundary: bool,
    /// outward from the element
    pub normal: Vec3,
    pub measure: f64,
    pub diameter: f64,
    pub x: Vec<Vec3>,
    pub w: Vec<f64>,
    /// element basis at the facet points, `phi[q * nb + i]`
    pub phi: Vec<f64>,
    /// facet basis, `psi[q * nf + m]`
    pub psi: Vec<f64>,
}

impl ElementTab {
    pub fn nq(&self) -> usize {
        self.w.len()
    }

    pub fn phi_at(&self, q: usize) -> &[f64] {
        &self.phi[q * self.nb..(q + 1) * self.nb]
    }

    pub fn grad_at(&self, q: usize) -> &[Vec3] {
        &self.grad[q * self.nb..(q + 1) * self.nb]
    }
}

impl FacetTab {
    pub fn nq(&self) -> usize {
        self.w.len()
    }
}

impl ReferenceSpace {
    pub fn new(dim: usize, degree: usize, element_quad: usize, facet_quad: usize) -> Result<Self> {
        let basis = ScalarBasis::new(dim, degree)?;
        let facet_basis = ScalarBasis::new(dim - 1, degree)?;
        let element_rule = quadrature_rule(dim, element_quad)?;
        let facet_rule = quadrature_rule(dim - 1, facet_quad)?;
        let (ref_values, ref_grads) = super::scalar::eval_scalar_basis(&basis, &element_rule.points);
        let facet_values = facet_rule
            .points
            .iter()
            .flat_map(|p| facet_basis.eval(&p[..dim - 1]))
            .collect();
        Ok(Self {
            dim,
            degree,
            basis,
            facet_basis,
            element_rule,
            facet_rule,
            ref_values,
            ref_grads,
            facet_values,
        })
    }

    /// Default rules: exactness `2k + 4` on elements and `2k + 3` on facets.
    pub fn with_default_quadrature(dim: usize, degree: usize) -> Result<Self> {
        Self::new(dim, degree, 2 * degree + 4, 2 * degree + 3)
    }

    pub fn nb(&self) -> usize {
        self.basis.len()
    }

    pub fn nf(&self) -> usize {
        self.facet_basis.len()
    }

    pub fn tabulate_element(&self, mesh: &Mesh, e: usize) -> ElementTab {
        let geo = mesh.geometry(e);
        let nb = self.nb();
        let s = 1.0 / geo.det.abs().sqrt();
        let x = self
            .element_rule
            .points
            .iter()
            .map(|p| geo.to_physical(&p[..self.dim]))
            .collect();
        let w = self.element_rule.weights.iter().map(|w| w * geo.det.abs()).collect();
        let phi = self.ref_values.iter().map(|v| v * s).collect();
        let grad = self
            .ref_grads
            .iter()
            .map(|g| vecops::scale(s, &geo.push_gradient(&g[..self.dim])))
            .collect();
        ElementTab {
            element: e,
            nb,
            x,
            w,
            phi,
            grad,
        }
    }

    pub fn tabulate_facet(&self, mesh: &Mesh, e: usize, local: usize) -> FacetTab {
        let geo = mesh.geometry(e);
        let f = mesh.element_facet(e, local);
        let fv = mesh.facet_vertices(f);
        let measure = mesh.facet_measure(f);
        let ref_measure = reference_measure(self.dim - 1);
        let ps = 1.0 / (measure / ref_measure).sqrt();
        let es = 1.0 / geo.det.abs().sqrt();
        let nb = self.nb();
        let nq = self.facet_rule.len();
        let mut x = Vec::with_capacity(nq);
        let mut phi = Vec::with_capacity(nq * nb);
        for p in &self.facet_rule.points {
            let mut xp = fv[0];
            for j in 1..self.dim {
                let t = vecops::sub(&fv[j], &fv[0]);
                xp = vecops::add(&xp, &vecops::scale(p[j - 1], &t));
            }
            let xi = geo.to_reference(&xp);
            phi.extend(self.basis.eval(&xi[..self.dim]).into_iter().map(|v| v * es));
            x.push(xp);
        }
        FacetTab {
            facet: f,
            local,
            boundary: mesh.is_boundary_facet(f),
            normal: mesh.outward_normal(e, local),
            measure,
            diameter: mesh.facet_diameter(f),
            x,
            w: self.facet_rule.weights.iter().map(|w| w * measure / ref_measure).collect(),
            phi,
            psi: self.facet_values.iter().map(|v| v * ps).collect(),
        }
    }

    pub fn tabulate_facets(&self, mesh: &Mesh, e: usize) -> Vec<FacetTab> {
        (0..=self.dim).map(|l| self.tabulate_facet(mesh, e, l)).collect()
    }

    /// Physical basis values and gradients at an arbitrary physical point.
    pub fn eval_physical(&self, geo: &ElementGeometry, x: &Vec3) -> (Vec<f64>, Vec<Vec3>) {
        let xi = geo.to_reference(x);
        let s = 1.0 / geo.det.abs().sqrt();
        let (v, g) = self.basis.eval_with_gradients(&xi[..self.dim]);
        (
            v.into_iter().map(|v| v * s).collect(),
            g.iter().map(|g| vecops::scale(s, &geo.push_gradient(&g[..self.dim]))).collect(),
        )
    }

    /// Facet basis values at a physical point of facet `f`.
    pub fn eval_facet_physical(&self, mesh: &Mesh, f: usize, x: &Vec3) -> Vec<f64> {
        let fv = mesh.facet_vertices(f);
        let s = facet_reference_coords(self.dim, &fv, x);
        let scale = 1.0 / (mesh.facet_measure(f) / reference_measure(self.dim - 1)).sqrt();
        self.facet_basis
            .eval(&s[..self.dim - 1])
            .into_iter()
            .map(|v| v * scale)
            .collect()
    }
}

/// Coordinates of `x` in the facet parametrization `fv0 + sum s_j (fv_j - fv0)`.
fn facet_reference_coords(dim: usize, fv: &[Vec3], x: &Vec3) -> [f64; 2] {
    let d = vecops::sub(x, &fv[0]);
    if dim == 2 {
        let t = vecops::sub(&fv[1], &fv[0]);
        [vecops::dot(&d, &t) / vecops::dot(&t, &t), 0.0]
    } else {
        let a = vecops::sub(&fv[1], &fv[0]);
        let b = vecops::sub(&fv[2], &fv[0]);
        let (aa, ab, bb) = (vecops::dot(&a, &a), vecops::dot(&a, &b), vecops::dot(&b, &b));
        let (da, db) = (vecops::dot(&d, &a), vecops::dot(&d, &b));
        let det = aa * bb - ab * ab;
        [(da * bb - db * ab) / det, (db * aa - da * ab) / det]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_unit_cube_mesh, build_unit_square_mesh, DiagonalPattern};

    #[test]
    fn physical_orthonormality() {
        let mesh = build_unit_cube_mesh(2).unwrap();
        let space = ReferenceSpace::with_default_quadrature(3, 2).unwrap();
        for e in [0, 7, 31] {
            let t = space.tabulate_element(&mesh, e);
            let nb = t.nb;
            for i in 0..nb {
                for j in 0..nb {
                    let g: f64 = (0..t.nq()).map(|q| t.w[q] * t.phi_at(q)[i] * t.phi_at(q)[j]).sum();
                    let ex = if i == j { 1.0 } else { 0.0 };
                    assert!((g - ex).abs() < 1e-11);
                }
            }
            for ft in space.tabulate_facets(&mesh, e) {
                let nf = space.nf();
                for i in 0..nf {
                    for j in 0..nf {
                        let g: f64 = (0..ft.nq()).map(|q| ft.w[q] * ft.psi[q * nf + i] * ft.psi[q * nf + j]).sum();
                        let ex = if i == j { 1.0 } else { 0.0 };
                        assert!((g - ex).abs() < 1e-11);
                    }
                }
            }
        }
    }

    #[test]
    fn facet_points_agree_from_both_sides() {
        let mesh = build_unit_square_mesh(3, DiagonalPattern::default()).unwrap();
        let space = ReferenceSpace::with_default_quadrature(2, 1).unwrap();
        for f in 0..mesh.num_facets() {
            let adj = *mesh.facet_adjacency(f);
            if let Some(r) = adj.right {
                let a = space.tabulate_facet(&mesh, adj.left.element, adj.left.local);
                let b = space.tabulate_facet(&mesh, r.element, r.local);
                for q in 0..a.nq() {
                    assert!(vecops::norm(&vecops::sub(&a.x[q], &b.x[q])) < 1e-14);
                }
                assert!(vecops::norm(&vecops::add(&a.normal, &b.normal)) < 1e-14);
            }
        }
    }

    #[test]
    fn facet_point_eval_matches_tabulation() {
        let mesh = build_unit_cube_mesh(1).unwrap();
        let space = ReferenceSpace::with_default_quadrature(3, 1).unwrap();
        let ft = space.tabulate_facet(&mesh, 2, 1);
        let nf = space.nf();
        for q in 0..ft.nq() {
            let v = space.eval_facet_physical(&mesh, ft.facet, &ft.x[q]);
            for m in 0..nf {
                assert!((v[m] - ft.psi[q * nf + m]).abs() < 1e-12);
            }
        }
    }
}
