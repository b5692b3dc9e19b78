use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::{post_space, solve_local, PostField, PostKind};
use crate::assembly::FieldSolution;
use crate::basis::{build_curl_range_basis, curl_of_w_component, n_cross_w_component, ReferenceSpace};
use crate::error::Result;
use crate::vecops::{self, Vec3};

/// Local system of the curl-fit scheme on element `e`. The first rows test
/// against `r` in `curl P_{k+1}`:
/// `(u* - u_h, curl r) - <u* - lam, n x r> = 0`; the remaining rows keep the
/// moments of `u_h` against `grad P_{k+2}`.
pub fn curlfit_system(sol: &FieldSolution, space: &ReferenceSpace, e: usize) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let disc = &sol.disc;
    let lay = disc.layout;
    let (dim, cw, nlo) = (lay.dim, lay.cw, lay.nb);
    let nhi = space.nb();
    let n = dim * nhi;
    let crb = build_curl_range_basis(dim, disc.k, disc.mesh.geometry(e))?;
    let nc = crb.curl.len();
    let mut a = DMatrix::zeros(n, n);
    let mut b = DVector::zeros(n);

    // field of test function s at given basis values, as P_k^{cw} combination
    let combine = |s: usize, vals: &dyn Fn(usize, usize) -> Vec3| -> Vec3 {
        let mut out = [0.0; 3];
        for aa in 0..cw {
            for j in 0..nlo {
                let c = crb.curl[s][aa * nlo + j];
                if c != 0.0 {
                    out = vecops::add(&out, &vecops::scale(c, &vals(aa, j)));
                }
            }
        }
        out
    };

    let tk = disc.space.tabulate_element(&disc.mesh, e);
    let tp = space.tabulate_element(&disc.mesh, e);
    for q in 0..tk.nq() {
        let wq = tk.w[q];
        let grad = tk.grad_at(q);
        let uh = sol.u_from_basis(e, tk.phi_at(q));
        let phi_hi = tp.phi_at(q);
        for s in 0..nc {
            let cr = combine(s, &|aa, j| curl_of_w_component(&grad[j], aa, dim));
            for c in 0..dim {
                for i in 0..nhi {
                    a[(s, c * nhi + i)] += wq * phi_hi[i] * cr[c];
                }
            }
            b[s] += wq * vecops::dot(&uh, &cr);
        }
    }
    for l in 0..=dim {
        let fk = disc.space.tabulate_facet(&disc.mesh, e, l);
        let fp = space.tabulate_facet(&disc.mesh, e, l);
        let nrm = fk.normal;
        let lam_c = sol.facet_trace(fk.facet);
        for q in 0..fk.nq() {
            let wq = fk.w[q];
            let phi_lo = &fk.phi[q * nlo..(q + 1) * nlo];
            let phi_hi = &fp.phi[q * nhi..(q + 1) * nhi];
            let lam = FieldSolution::combine(lam_c, dim, &fk.psi[q * lay.nf..(q + 1) * lay.nf]);
            for s in 0..nc {
                let nr = combine(s, &|aa, j| vecops::scale(phi_lo[j], &n_cross_w_component(&nrm, aa, dim)));
                for c in 0..dim {
                    for i in 0..nhi {
                        a[(s, c * nhi + i)] -= wq * phi_hi[i] * nr[c];
                    }
                }
                b[s] -= wq * vecops::dot(&lam, &nr);
            }
        }
    }
    // gradient rows: the basis is orthonormal and P_k is a prefix of P_{k+1}
    for (t, g) in crb.grad.iter().enumerate() {
        let r = nc + t;
        for c in 0..dim {
            for i in 0..nhi {
                a[(r, c * nhi + i)] = g[c * nhi + i];
            }
            for i in 0..nlo {
                b[r] += g[c * nhi + i] * sol.u[e][c * nlo + i];
            }
        }
    }
    Ok((a, b))
}

pub fn postprocess_curlfit(sol: &FieldSolution) -> Result<PostField> {
    let disc = &sol.disc;
    let space = post_space(disc)?;
    let solved: Vec<(Vec<f64>, f64)> = (0..disc.mesh.num_elements())
        .into_par_iter()
        .map(|e| {
            let (a, b) = curlfit_system(sol, &space, e)?;
            solve_local(e, &a, &b)
        })
        .collect::<Result<_>>()?;
    let max_residual = solved.iter().map(|s| s.1).fold(0.0, f64::max);
    Ok(PostField {
        kind: PostKind::Curlfit,
        disc: disc.clone(),
        space,
        coeffs: solved.into_iter().map(|s| s.0).collect(),
        max_residual,
    })
}
