use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::{post_space, solve_local, PostField, PostKind};
use crate::assembly::FieldSolution;
use crate::basis::{poly_dim, ReferenceSpace};
use crate::error::{HdgError, Result};
use crate::vecops;

/// Local system of the 2D scheme on element `e`: rows are the edge moments
/// of `Rn . u*` against `P_{k+1}(F)`, the moments against `R grad v` for
/// non-constant `v` in `P_k`, and the divergence moments against `P_{k-1}`.
pub fn star_system(sol: &FieldSolution, space: &ReferenceSpace, e: usize) -> (DMatrix<f64>, DVector<f64>) {
    let disc = &sol.disc;
    let lay = disc.layout;
    let k = disc.k;
    let (nlo, nhi, nfh) = (lay.nb, space.nb(), space.nf());
    let ndiv = if k == 0 { 0 } else { poly_dim(k - 1, 2) };
    let n = 2 * nhi;
    let mut a = DMatrix::zeros(n, n);
    let mut b = DVector::zeros(n);

    let mut row = 0;
    for l in 0..3 {
        let fk = disc.space.tabulate_facet(&disc.mesh, e, l);
        let fp = space.tabulate_facet(&disc.mesh, e, l);
        let rn = vecops::rotate(&fk.normal);
        let lam_c = sol.facet_trace(fk.facet);
        for q in 0..fk.nq() {
            let lam = FieldSolution::combine(lam_c, 2, &fk.psi[q * lay.nf..(q + 1) * lay.nf]);
            let phi = &fp.phi[q * nhi..(q + 1) * nhi];
            let eta = &fp.psi[q * nfh..(q + 1) * nfh];
            let rl = vecops::dot(&rn, &lam);
            for (m, em) in eta.iter().enumerate() {
                let wm = fk.w[q] * em;
                for c in 0..2 {
                    for i in 0..nhi {
                        a[(row + m, c * nhi + i)] += wm * rn[c] * phi[i];
                    }
                }
                b[row + m] += wm * rl;
            }
        }
        row += nfh;
    }

    let tk = disc.space.tabulate_element(&disc.mesh, e);
    let tp = space.tabulate_element(&disc.mesh, e);
    for q in 0..tk.nq() {
        let wq = tk.w[q];
        let (phi_lo, grad_lo) = (tk.phi_at(q), tk.grad_at(q));
        let (phi_hi, grad_hi) = (tp.phi_at(q), tp.grad_at(q));
        let uh = sol.u_from_basis(e, phi_lo);
        let div_uh: f64 = (0..2)
            .map(|c| (0..nlo).map(|i| sol.u[e][c * nlo + i] * grad_lo[i][c]).sum::<f64>())
            .sum();
        for j in 1..nlo {
            let rg = [grad_lo[j][1], -grad_lo[j][0]];
            let r = row + j - 1;
            for c in 0..2 {
                for i in 0..nhi {
                    a[(r, c * nhi + i)] += wq * phi_hi[i] * rg[c];
                }
            }
            b[r] += wq * (uh[0] * rg[0] + uh[1] * rg[1]);
        }
        for s in 0..ndiv {
            let r = row + nlo - 1 + s;
            for c in 0..2 {
                for i in 0..nhi {
                    a[(r, c * nhi + i)] += wq * phi_lo[s] * grad_hi[i][c];
                }
            }
            b[r] += wq * phi_lo[s] * div_uh;
        }
    }
    debug_assert_eq!(row + nlo - 1 + ndiv, n);
    (a, b)
}

pub fn postprocess_star_2d(sol: &FieldSolution) -> Result<PostField> {
    let disc = &sol.disc;
    if disc.layout.dim != 2 {
        return Err(HdgError::Unsupported("the star postprocessing is two-dimensional only".into()));
    }
    let space = post_space(disc)?;
    let solved: Vec<(Vec<f64>, f64)> = (0..disc.mesh.num_elements())
        .into_par_iter()
        .map(|e| {
            let (a, b) = star_system(sol, &space, e);
            solve_local(e, &a, &b)
        })
        .collect::<Result<_>>()?;
    let max_residual = solved.iter().map(|s| s.1).fold(0.0, f64::max);
    Ok(PostField {
        kind: PostKind::Star2d,
        disc: disc.clone(),
        space,
        coeffs: solved.into_iter().map(|s| s.0).collect(),
        max_residual,
    })
}
