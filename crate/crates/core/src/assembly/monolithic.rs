//! Dense solve of the full, uncondensed system. Only meant for small meshes,
//! as a reference for the condensed pipeline.

use nalgebra::{DMatrix, DVector};

use super::global::prescribed_traces;
use super::{assemble_local, Discretization};
use crate::error::{HdgError, Result};
use crate::linsolve::DenseLu;

/// Size limit of the dense reference system.
pub const MONOLITHIC_MAX_UNKNOWNS: usize = 6000;

#[derive(Clone, Debug)]
pub struct MonolithicSolution {
    /// per element `(w, u)` coefficients
    pub interior: Vec<DVector<f64>>,
    pub lambda: Vec<f64>,
    /// the assembled matrix, rows and columns ordered element interiors
    /// first, then trace dofs
    pub matrix: DMatrix<f64>,
}

pub fn monolithic_solve(disc: &Discretization) -> Result<MonolithicSolution> {
    let lay = disc.layout;
    let ne = disc.mesh.num_elements();
    let ni = lay.interior();
    let nt = disc.num_trace_dofs();
    let n = ne * ni + nt;
    if n > MONOLITHIC_MAX_UNKNOWNS {
        return Err(HdgError::InvalidArgument(format!(
            "monolithic reference limited to {MONOLITHIC_MAX_UNKNOWNS} unknowns, got {n}"
        )));
    }
    let prescribed = prescribed_traces(disc);
    let per = lay.per_facet();
    let mut m = DMatrix::zeros(n, n);
    let mut rhs = DVector::zeros(n);
    for e in 0..ne {
        let bl = assemble_local(disc, e)?;
        let off = e * ni;
        let tg: Vec<usize> = (0..lay.trace())
            .map(|li| ne * ni + bl.facets[li / per] * per + li % per)
            .collect();
        for i in 0..ni {
            rhs[off + i] += bl.f[i];
            for j in 0..ni {
                m[(off + i, off + j)] += bl.a[(i, j)];
            }
            for (lj, &gj) in tg.iter().enumerate() {
                m[(off + i, gj)] += bl.b[(i, lj)];
            }
        }
        for (li, &gi) in tg.iter().enumerate() {
            rhs[gi] += bl.g[li];
            for j in 0..ni {
                m[(gi, off + j)] += bl.c[(li, j)];
            }
            for (lj, &gj) in tg.iter().enumerate() {
                m[(gi, gj)] += bl.d[(li, lj)];
            }
        }
    }
    let mut system = m.clone();
    for (g, p) in prescribed.iter().enumerate() {
        if let Some(v) = p {
            let r = ne * ni + g;
            system.row_mut(r).fill(0.0);
            system[(r, r)] = 1.0;
            rhs[r] = *v;
        }
    }
    let x = DenseLu::factor(&system)?.solve(rhs.as_slice());
    let interior = (0..ne).map(|e| DVector::from_column_slice(&x[e * ni..(e + 1) * ni])).collect();
    Ok(MonolithicSolution {
        interior,
        lambda: x[ne * ni..].to_vec(),
        matrix: m,
    })
}
