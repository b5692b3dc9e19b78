//! The global system in the facet trace unknowns.

use super::condense::CondensedElement;
use super::Discretization;
use crate::error::{HdgError, Result};
use crate::linsolve::SparseMatrix;
use crate::mesh::Mesh;
use crate::vecops::{self, Vec3};

#[derive(Clone, Debug)]
pub struct TraceSystem {
    pub matrix: SparseMatrix,
    pub rhs: Vec<f64>,
    /// all trace dofs, constrained ones included
    pub total_dofs: usize,
    /// reduced index of every global trace dof, `None` when constrained
    pub reduced: Vec<Option<usize>>,
    /// prescribed values, indexed by global trace dof
    pub prescribed: Vec<Option<f64>>,
}

impl TraceSystem {
    pub fn num_unknowns(&self) -> usize {
        self.rhs.len()
    }

    pub fn num_constrained(&self) -> usize {
        self.prescribed.iter().filter(|p| p.is_some()).count()
    }

    /// Full trace vector from a solution of the reduced system.
    pub fn expand(&self, x: &[f64]) -> Vec<f64> {
        (0..self.total_dofs)
            .map(|g| match (self.reduced[g], self.prescribed[g]) {
                (Some(r), _) => x[r],
                (None, Some(v)) => v,
                (None, None) => 0.0,
            })
            .collect()
    }
}

fn on_segment(x: &Vec3, a: &Vec3, b: &Vec3) -> bool {
    let ab = vecops::sub(b, a);
    let ax = vecops::sub(x, a);
    let len2 = vecops::dot(&ab, &ab);
    let t = vecops::dot(&ax, &ab) / len2;
    let closest = vecops::add(a, &vecops::scale(t, &ab));
    (-1e-12..=1.0 + 1e-12).contains(&t) && vecops::norm(&vecops::sub(x, &closest)) < 1e-12
}

/// Facets whose vertices all lie on the segment `[a, b]`.
pub fn facets_on_segment(mesh: &Mesh, a: &Vec3, b: &Vec3) -> Vec<usize> {
    (0..mesh.num_facets())
        .filter(|&f| mesh.facet_vertices(f).iter().all(|v| on_segment(v, a, b)))
        .collect()
}

/// Prescribed trace values: the facet L2 projection of the slit data.
pub fn prescribed_traces(disc: &Discretization) -> Vec<Option<f64>> {
    let lay = disc.layout;
    let mut out = vec![None; disc.num_trace_dofs()];
    if let Some(slit) = &disc.spec.slit {
        for f in facets_on_segment(&disc.mesh, &slit.from, &slit.to) {
            let side = disc.mesh.facet_adjacency(f).left;
            let ft = disc.space.tabulate_facet(&disc.mesh, side.element, side.local);
            let mut coef = vec![0.0; lay.per_facet()];
            for q in 0..ft.nq() {
                let v = (slit.value)(&ft.x[q]);
                for cc in 0..lay.dim {
                    for m in 0..lay.nf {
                        coef[cc * lay.nf + m] += ft.w[q] * ft.psi[q * lay.nf + m] * v[cc];
                    }
                }
            }
            for cc in 0..lay.dim {
                for m in 0..lay.nf {
                    out[lay.global_trace(f, cc, m)] = Some(coef[cc * lay.nf + m]);
                }
            }
        }
    }
    out
}

/// Sums the element Schur complements into the reduced trace system.
/// Strongly constrained dofs are eliminated to the right-hand side.
pub fn assemble_global(disc: &Discretization, condensed: &[CondensedElement]) -> Result<TraceSystem> {
    let lay = disc.layout;
    let total = disc.num_trace_dofs();
    let prescribed = prescribed_traces(disc);
    let mut reduced = vec![None; total];
    let mut next = 0;
    for (g, p) in prescribed.iter().enumerate() {
        if p.is_none() {
            reduced[g] = Some(next);
            next += 1;
        }
    }
    let n = next;
    let mut rhs = vec![0.0; n];
    let per = lay.per_facet();
    let mut triplets = Vec::with_capacity(condensed.len() * lay.trace() * lay.trace());
    for ce in condensed {
        let global: Vec<usize> = (0..lay.trace())
            .map(|li| ce.facets[li / per] * per + li % per)
            .collect();
        for (li, &gi) in global.iter().enumerate() {
            let Some(ri) = reduced[gi] else { continue };
            rhs[ri] += ce.rhs[li];
            for (lj, &gj) in global.iter().enumerate() {
                let s = ce.schur[(li, lj)];
                match reduced[gj] {
                    Some(rj) => triplets.push((ri, rj, s)),
                    None => rhs[ri] -= s * prescribed[gj].unwrap_or(0.0),
                }
            }
        }
    }
    let matrix = SparseMatrix::from_triplets(n, n, triplets);
    let empty = matrix.empty_rows();
    if let Some(&r) = empty.first() {
        return Err(HdgError::Topology(format!(
            "trace system has {} empty rows (first: reduced dof {r})",
            empty.len()
        )));
    }
    Ok(TraceSystem {
        matrix,
        rhs,
        total_dofs: total,
        reduced,
        prescribed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{condense_all, QuadratureSettings};
    use crate::mesh::{build_unit_cube_mesh, build_unit_square_mesh};
    use crate::problem::experiment_problem;
    use std::sync::Arc;

    #[test]
    fn cube_system_dimension() {
        let mesh = build_unit_cube_mesh(1).unwrap();
        let nf = mesh.num_facets();
        let disc = Discretization::new(Arc::new(mesh), experiment_problem(1, 1.0).unwrap(), 0, QuadratureSettings::default())
            .unwrap();
        let sys = assemble_global(&disc, &condense_all(&disc).unwrap()).unwrap();
        assert_eq!(sys.num_unknowns(), nf * 3);
        assert_eq!(sys.num_constrained(), 0);
    }

    #[test]
    fn slit_facets_are_constrained() {
        let mesh = build_unit_square_mesh(8, Default::default()).unwrap();
        let slit = facets_on_segment(&mesh, &[0.5, 0.0, 0.0], &[0.5, 0.5, 0.0]);
        assert_eq!(slit.len(), 4);
        let disc = Discretization::new(Arc::new(mesh), experiment_problem(3, 1e-9).unwrap(), 1, QuadratureSettings::default())
            .unwrap();
        let sys = assemble_global(&disc, &condense_all(&disc).unwrap()).unwrap();
        assert_eq!(sys.num_constrained(), 4 * 2 * 2);
        assert_eq!(sys.num_unknowns() + sys.num_constrained(), sys.total_dofs);
    }
}
