//! Uniform simplicial meshes of the unit square and unit cube with full facet
//! topology.
//!
//! Local facet `i` of an element is the facet opposite its local vertex `i`.
//! Every facet stores its vertices in ascending global order; that ordering
//! also fixes the facet's own parametrization, so both adjacent elements see
//! the same trace basis and the same facet quadrature points.

mod build;
pub mod vtk;

use std::collections::HashMap;

use crate::error::{HdgError, Result};
use crate::vecops::{self, Vec3};

pub use build::{build_unit_cube_mesh, build_unit_square_mesh, DiagonalPattern};

/// One side of a facet as seen from an adjacent element.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FacetSide {
    pub element: usize,
    pub local: usize,
    /// `+1` when the element's outward normal equals the stored facet normal.
    pub sign: i8,
}

#[derive(Clone, Copy, Debug)]
pub struct FacetAdjacency {
    pub left: FacetSide,
    pub right: Option<FacetSide>,
}

impl FacetAdjacency {
    pub fn is_boundary(&self) -> bool {
        self.right.is_none()
    }

    pub fn sides(&self) -> impl Iterator<Item = FacetSide> + '_ {
        std::iter::once(self.left).chain(self.right)
    }
}

/// Affine map `x = origin + jac * xi` from the reference simplex.
#[derive(Clone, Debug)]
pub struct ElementGeometry {
    pub dim: usize,
    pub origin: Vec3,
    /// column `j` is `v_{j+1} - v_0`
    pub jac: [[f64; 3]; 3],
    pub jac_inv: [[f64; 3]; 3],
    pub det: f64,
}

impl ElementGeometry {
    pub fn new(dim: usize, verts: &[Vec3]) -> Self {
        let origin = verts[0];
        let mut jac = [[0.0; 3]; 3];
        for j in 0..dim {
            for i in 0..dim {
                jac[i][j] = verts[j + 1][i] - origin[i];
            }
        }
        let (det, jac_inv) = invert(dim, &jac);
        Self {
            dim,
            origin,
            jac,
            jac_inv,
            det,
        }
    }

    pub fn to_physical(&self, xi: &[f64]) -> Vec3 {
        let mut x = self.origin;
        for i in 0..self.dim {
            for j in 0..self.dim {
                x[i] += self.jac[i][j] * xi[j];
            }
        }
        x
    }

    pub fn to_reference(&self, x: &Vec3) -> Vec3 {
        let d = vecops::sub(x, &self.origin);
        let mut xi = [0.0; 3];
        for i in 0..self.dim {
            for j in 0..self.dim {
                xi[i] += self.jac_inv[i][j] * d[j];
            }
        }
        xi
    }

    /// Maps a reference gradient to a physical one: `J^{-T} g`.
    pub fn push_gradient(&self, g_ref: &[f64]) -> Vec3 {
        let mut g = [0.0; 3];
        for i in 0..self.dim {
            for j in 0..self.dim {
                g[i] += self.jac_inv[j][i] * g_ref[j];
            }
        }
        g
    }
}

fn invert(dim: usize, m: &[[f64; 3]; 3]) -> (f64, [[f64; 3]; 3]) {
    let mut inv = [[0.0; 3]; 3];
    match dim {
        1 => {
            inv[0][0] = 1.0 / m[0][0];
            (m[0][0], inv)
        }
        2 => {
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            inv[0][0] = m[1][1] / det;
            inv[0][1] = -m[0][1] / det;
            inv[1][0] = -m[1][0] / det;
            inv[1][1] = m[0][0] / det;
            (det, inv)
        }
        _ => {
            let c0 = vecops::cross(&[m[0][1], m[1][1], m[2][1]], &[m[0][2], m[1][2], m[2][2]]);
            let c1 = vecops::cross(&[m[0][2], m[1][2], m[2][2]], &[m[0][0], m[1][0], m[2][0]]);
            let c2 = vecops::cross(&[m[0][0], m[1][0], m[2][0]], &[m[0][1], m[1][1], m[2][1]]);
            let det = m[0][0] * c0[0] + m[1][0] * c0[1] + m[2][0] * c0[2];
            for j in 0..3 {
                inv[0][j] = c0[j] / det;
                inv[1][j] = c1[j] / det;
                inv[2][j] = c2[j] / det;
            }
            (det, inv)
        }
    }
}

/// Conforming simplicial mesh.
#[derive(Clone, Debug)]
pub struct Mesh {
    dim: usize,
    vertices: Vec<Vec3>,
    elements: Vec<[usize; 4]>,
    facets: Vec<[usize; 3]>,
    facet_adjacency: Vec<FacetAdjacency>,
    element_facets: Vec<[usize; 4]>,
    facet_measure: Vec<f64>,
    facet_diameter: Vec<f64>,
    element_measure: Vec<f64>,
    element_diameter: Vec<f64>,
    facet_normal: Vec<Vec3>,
    geometry: Vec<ElementGeometry>,
}

impl Mesh {
    /// Builds topology from vertex coordinates and element connectivity
    /// (`dim + 1` vertex ids per element, entries past that ignored).
    pub fn from_elements(dim: usize, vertices: Vec<Vec3>, elements: Vec<[usize; 4]>) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(HdgError::InvalidArgument(format!("mesh dimension {dim} not supported")));
        }
        let nv = dim + 1;
        let mut geometry = Vec::with_capacity(elements.len());
        let mut element_measure = Vec::with_capacity(elements.len());
        let mut element_diameter = Vec::with_capacity(elements.len());
        let ref_measure = if dim == 2 { 0.5 } else { 1.0 / 6.0 };
        for (e, el) in elements.iter().enumerate() {
            let verts: Vec<Vec3> = el[..nv].iter().map(|&v| vertices[v]).collect();
            let geo = ElementGeometry::new(dim, &verts);
            if geo.det.abs() < 1e-14 {
                return Err(HdgError::InvalidArgument(format!("element {e} is degenerate")));
            }
            element_measure.push(geo.det.abs() * ref_measure);
            let mut diam: f64 = 0.0;
            for a in 0..nv {
                for b in a + 1..nv {
                    diam = diam.max(vecops::norm(&vecops::sub(&verts[a], &verts[b])));
                }
            }
            element_diameter.push(diam);
            geometry.push(geo);
        }

        let mut lookup: HashMap<[usize; 3], usize> = HashMap::new();
        let mut facets: Vec<[usize; 3]> = Vec::new();
        let mut adjacency: Vec<(FacetSide, Option<FacetSide>)> = Vec::new();
        let mut element_facets = vec![[usize::MAX; 4]; elements.len()];
        for (e, el) in elements.iter().enumerate() {
            for local in 0..nv {
                let mut key = [usize::MAX; 3];
                let mut c = 0;
                for (i, &v) in el[..nv].iter().enumerate() {
                    if i != local {
                        key[c] = v;
                        c += 1;
                    }
                }
                key[..dim].sort_unstable();
                let side = FacetSide {
                    element: e,
                    local,
                    sign: 1,
                };
                match lookup.get(&key) {
                    Some(&f) => {
                        let entry = &mut adjacency[f];
                        if entry.1.is_some() {
                            return Err(HdgError::Topology(format!(
                                "facet {key:?} shared by more than two elements"
                            )));
                        }
                        entry.1 = Some(FacetSide { sign: -1, ..side });
                        element_facets[e][local] = f;
                    }
                    None => {
                        let f = facets.len();
                        lookup.insert(key, f);
                        facets.push(key);
                        adjacency.push((side, None));
                        element_facets[e][local] = f;
                    }
                }
            }
        }

        let mut facet_measure = Vec::with_capacity(facets.len());
        let mut facet_diameter = Vec::with_capacity(facets.len());
        let mut facet_normal = Vec::with_capacity(facets.len());
        for (f, fv) in facets.iter().enumerate() {
            let p: Vec<Vec3> = fv[..dim].iter().map(|&v| vertices[v]).collect();
            let (measure, mut normal, diam) = if dim == 2 {
                let t = vecops::sub(&p[1], &p[0]);
                let len = vecops::norm(&t);
                (len, [t[1] / len, -t[0] / len, 0.0], len)
            } else {
                let c = vecops::cross(&vecops::sub(&p[1], &p[0]), &vecops::sub(&p[2], &p[0]));
                let nc = vecops::norm(&c);
                let mut diam: f64 = 0.0;
                for a in 0..3 {
                    for b in a + 1..3 {
                        diam = diam.max(vecops::norm(&vecops::sub(&p[a], &p[b])));
                    }
                }
                (0.5 * nc, vecops::scale(1.0 / nc, &c), diam)
            };
            let left = adjacency[f].0.element;
            let opposite = vertices[elements[left][adjacency[f].0.local]];
            if vecops::dot(&normal, &vecops::sub(&p[0], &opposite)) < 0.0 {
                normal = vecops::scale(-1.0, &normal);
            }
            facet_measure.push(measure);
            facet_diameter.push(diam);
            facet_normal.push(normal);
        }

        let facet_adjacency = adjacency
            .into_iter()
            .map(|(left, right)| FacetAdjacency { left, right })
            .collect();

        Ok(Self {
            dim,
            vertices,
            elements,
            facets,
            facet_adjacency,
            element_facets,
            facet_measure,
            facet_diameter,
            element_measure,
            element_diameter,
            facet_normal,
            geometry,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn num_facets(&self) -> usize {
        self.facets.len()
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> &Vec3 {
        &self.vertices[v]
    }

    /// Vertex ids of element `e` (`dim + 1` entries).
    pub fn element(&self, e: usize) -> &[usize] {
        &self.elements[e][..self.dim + 1]
    }

    pub fn element_vertices(&self, e: usize) -> Vec<Vec3> {
        self.element(e).iter().map(|&v| self.vertices[v]).collect()
    }

    /// Vertex ids of facet `f` in ascending order (`dim` entries).
    pub fn facet(&self, f: usize) -> &[usize] {
        &self.facets[f][..self.dim]
    }

    pub fn facet_vertices(&self, f: usize) -> Vec<Vec3> {
        self.facet(f).iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn facet_adjacency(&self, f: usize) -> &FacetAdjacency {
        &self.facet_adjacency[f]
    }

    pub fn is_boundary_facet(&self, f: usize) -> bool {
        self.facet_adjacency[f].is_boundary()
    }

    pub fn boundary_facets(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_facets()).filter(|&f| self.is_boundary_facet(f))
    }

    /// Global facet id of local facet `local` of element `e`.
    pub fn element_facet(&self, e: usize, local: usize) -> usize {
        self.element_facets[e][local]
    }

    pub fn element_facets(&self, e: usize) -> &[usize] {
        &self.element_facets[e][..self.dim + 1]
    }

    pub fn facet_side(&self, e: usize, local: usize) -> FacetSide {
        let adj = &self.facet_adjacency[self.element_facet(e, local)];
        if adj.left.element == e && adj.left.local == local {
            adj.left
        } else {
            adj.right.expect("element side not registered on facet")
        }
    }

    pub fn facet_measure(&self, f: usize) -> f64 {
        self.facet_measure[f]
    }

    pub fn facet_diameter(&self, f: usize) -> f64 {
        self.facet_diameter[f]
    }

    pub fn element_measure(&self, e: usize) -> f64 {
        self.element_measure[e]
    }

    pub fn element_diameter(&self, e: usize) -> f64 {
        self.element_diameter[e]
    }

    /// Largest element diameter.
    pub fn mesh_size(&self) -> f64 {
        self.element_diameter.iter().cloned().fold(0.0, f64::max)
    }

    /// Unit normal of facet `f`, outward from its left element.
    pub fn facet_normal(&self, f: usize) -> &Vec3 {
        &self.facet_normal[f]
    }

    /// Outward unit normal of local facet `local` of element `e`.
    pub fn outward_normal(&self, e: usize, local: usize) -> Vec3 {
        let side = self.facet_side(e, local);
        let n = self.facet_normal[self.element_facet(e, local)];
        if side.sign > 0 {
            n
        } else {
            vecops::scale(-1.0, &n)
        }
    }

    pub fn geometry(&self, e: usize) -> &ElementGeometry {
        &self.geometry[e]
    }

    pub fn domain_measure(&self) -> f64 {
        self.element_measure.iter().sum()
    }

    /// Boundary facet whose closure contains `x`, if any.
    pub fn boundary_facet_containing(&self, x: &Vec3) -> Option<usize> {
        self.boundary_facets().find(|&f| self.facet_contains(f, x, 1e-12))
    }

    fn facet_contains(&self, f: usize, x: &Vec3, tol: f64) -> bool {
        let p = self.facet_vertices(f);
        let n = self.facet_normal[f];
        if vecops::dot(&vecops::sub(x, &p[0]), &n).abs() > tol {
            return false;
        }
        if self.dim == 2 {
            let t = vecops::sub(&p[1], &p[0]);
            let s = vecops::dot(&vecops::sub(x, &p[0]), &t) / vecops::dot(&t, &t);
            (-tol..=1.0 + tol).contains(&s)
        } else {
            let bary = triangle_barycentric(&p[0], &p[1], &p[2], x);
            bary.iter().all(|&b| b >= -tol)
        }
    }

    /// Element containing `x` (first match in element order), if any.
    pub fn locate(&self, x: &Vec3) -> Option<usize> {
        (0..self.num_elements()).find(|&e| self.element_contains(e, x, 1e-12))
    }

    pub fn element_contains(&self, e: usize, x: &Vec3, tol: f64) -> bool {
        let xi = self.geometry[e].to_reference(x);
        let s: f64 = xi[..self.dim].iter().sum();
        xi[..self.dim].iter().all(|&c| c >= -tol) && s <= 1.0 + tol
    }
}

fn triangle_barycentric(a: &Vec3, b: &Vec3, c: &Vec3, x: &Vec3) -> [f64; 3] {
    let v0 = vecops::sub(b, a);
    let v1 = vecops::sub(c, a);
    let v2 = vecops::sub(x, a);
    let d00 = vecops::dot(&v0, &v0);
    let d01 = vecops::dot(&v0, &v1);
    let d11 = vecops::dot(&v1, &v1);
    let d20 = vecops::dot(&v2, &v0);
    let d21 = vecops::dot(&v2, &v1);
    let denom = d00 * d11 - d01 * d01;
    let l1 = (d11 * d20 - d01 * d21) / denom;
    let l2 = (d00 * d21 - d01 * d20) / denom;
    [1.0 - l1 - l2, l1, l2]
}

/// Which part of the boundary a point belongs to, decided by the sign of
/// `beta . n` (ties go to the outflow part).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlowSide {
    Inflow,
    Outflow,
}

impl FlowSide {
    pub fn from_flux(beta_dot_n: f64) -> Self {
        if beta_dot_n < 0.0 {
            FlowSide::Inflow
        } else {
            FlowSide::Outflow
        }
    }
}

/// Classifies a boundary point as inflow or outflow. Returns `None` when `x`
/// does not lie on a boundary facet of `mesh`.
pub fn classify_boundary_point<B>(mesh: &Mesh, beta: B, x: &Vec3) -> Option<FlowSide>
where
    B: Fn(&Vec3) -> Vec3,
{
    let f = mesh.boundary_facet_containing(x)?;
    let n = mesh.facet_normal(f);
    Some(FlowSide::from_flux(vecops::dot(&beta(x), n)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_invariants(mesh: &Mesh) {
        let dim = mesh.dim();
        assert!((mesh.domain_measure() - 1.0).abs() < 1e-12);
        for f in 0..mesh.num_facets() {
            let adj = mesh.facet_adjacency(f);
            if let Some(right) = adj.right {
                let nl = mesh.outward_normal(adj.left.element, adj.left.local);
                let nr = mesh.outward_normal(right.element, right.local);
                for i in 0..3 {
                    assert_eq!(nl[i], -nr[i]);
                }
                assert!(adj.left.element < right.element);
            }
        }
        for e in 0..mesh.num_elements() {
            let mut s = [0.0; 3];
            for local in 0..=dim {
                let f = mesh.element_facet(e, local);
                let n = mesh.outward_normal(e, local);
                s = vecops::add(&s, &vecops::scale(mesh.facet_measure(f), &n));
            }
            assert!(vecops::norm(&s) < 1e-12, "closure fails on {e}: {s:?}");
        }
    }

    #[test]
    fn square_counts() {
        let m = build_unit_square_mesh(1, DiagonalPattern::default()).unwrap();
        assert_eq!(m.num_elements(), 2);
        assert_eq!(m.num_facets(), 5);
        assert_eq!(m.boundary_facets().count(), 4);

        let m = build_unit_square_mesh(2, DiagonalPattern::default()).unwrap();
        assert_eq!(m.num_elements(), 8);
        assert!((m.domain_measure() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn square_euler_characteristic() {
        // brute-force edge enumeration from element connectivity
        let m = build_unit_square_mesh(4, DiagonalPattern::default()).unwrap();
        let mut edges = std::collections::BTreeSet::new();
        for e in 0..m.num_elements() {
            let v = m.element(e);
            for a in 0..3 {
                for b in a + 1..3 {
                    edges.insert((v[a].min(v[b]), v[a].max(v[b])));
                }
            }
        }
        assert_eq!(m.num_vertices(), 25);
        assert_eq!(edges.len(), 56);
        assert_eq!(m.num_facets(), 56);
        assert_eq!(m.num_elements(), 32);
        let euler = m.num_vertices() as i64 - edges.len() as i64 + m.num_elements() as i64;
        assert_eq!(euler, 1);
    }

    #[test]
    fn square_invariants_both_patterns() {
        for pattern in [DiagonalPattern::LowerLeftUpperRight, DiagonalPattern::UpperLeftLowerRight] {
            for n in [1, 3, 8] {
                let m = build_unit_square_mesh(n, pattern).unwrap();
                assert_eq!(m.num_elements(), 2 * n * n);
                check_invariants(&m);
                for e in 0..m.num_elements() {
                    assert!((m.element_measure(e) - 0.5 / (n * n) as f64).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn cube_counts_and_volume() {
        let m = build_unit_cube_mesh(1).unwrap();
        assert_eq!(m.num_elements(), 6);
        for e in 0..6 {
            assert!((m.element_measure(e) - 1.0 / 6.0).abs() < 1e-15);
        }
        let m = build_unit_cube_mesh(2).unwrap();
        assert_eq!(m.num_elements(), 48);
        assert!((m.domain_measure() - 1.0).abs() < 1e-12);
        check_invariants(&m);
    }

    #[test]
    fn cube_interior_facets_shared_by_two() {
        // independent scan: count element occurrences of each sorted vertex triple
        let m = build_unit_cube_mesh(2).unwrap();
        let mut count: HashMap<[usize; 3], usize> = HashMap::new();
        for e in 0..m.num_elements() {
            let v = m.element(e);
            for skip in 0..4 {
                let mut key: Vec<usize> = (0..4).filter(|&i| i != skip).map(|i| v[i]).collect();
                key.sort_unstable();
                *count.entry([key[0], key[1], key[2]]).or_default() += 1;
            }
        }
        let on_boundary = |key: &[usize; 3]| {
            (0..3).any(|c| {
                let vals: Vec<f64> = key.iter().map(|&v| m.vertex(v)[c]).collect();
                vals.iter().all(|&x| x == 0.0) || vals.iter().all(|&x| x == 1.0)
            })
        };
        for (key, c) in &count {
            if on_boundary(key) {
                assert_eq!(*c, 1);
            } else {
                assert_eq!(*c, 2, "interior facet {key:?}");
            }
        }
        assert_eq!(count.len(), m.num_facets());
        assert_eq!(m.boundary_facets().count(), 6 * 2 * 4);
    }

    #[test]
    fn zero_subdivisions_rejected() {
        assert!(matches!(
            build_unit_square_mesh(0, DiagonalPattern::default()),
            Err(HdgError::InvalidArgument(_))
        ));
        assert!(matches!(build_unit_cube_mesh(0), Err(HdgError::InvalidArgument(_))));
    }

    #[test]
    fn boundary_classification() {
        let cube = build_unit_cube_mesh(2).unwrap();
        let beta = |_: &Vec3| [1.0, 2.0, 3.0];
        assert_eq!(
            classify_boundary_point(&cube, beta, &[0.0, 0.3, 0.6]),
            Some(FlowSide::Inflow)
        );
        assert_eq!(
            classify_boundary_point(&cube, beta, &[0.3, 0.6, 1.0]),
            Some(FlowSide::Outflow)
        );
        assert_eq!(classify_boundary_point(&cube, beta, &[0.3, 0.6, 0.5]), None);

        let square = build_unit_square_mesh(4, DiagonalPattern::default()).unwrap();
        let rotating = |x: &Vec3| [x[1] - 0.5, 0.5 - x[0], 0.0];
        assert_eq!(
            classify_boundary_point(&square, rotating, &[0.0, 0.25, 0.0]),
            Some(FlowSide::Outflow)
        );
        assert_eq!(FlowSide::from_flux(0.0), FlowSide::Outflow);
    }

    #[test]
    fn geometry_round_trip() {
        let m = build_unit_cube_mesh(2).unwrap();
        let geo = m.geometry(7);
        let x = geo.to_physical(&[0.2, 0.3, 0.1]);
        let xi = geo.to_reference(&x);
        assert!((xi[0] - 0.2).abs() < 1e-14 && (xi[1] - 0.3).abs() < 1e-14 && (xi[2] - 0.1).abs() < 1e-14);
        assert_eq!(m.locate(&x), Some(7));
    }
}
