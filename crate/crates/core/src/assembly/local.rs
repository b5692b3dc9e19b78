//! Element blocks of the HDG bilinear form.
//!
//! With test functions `(r, v)` and `mu`, the interior rows are
//!
//! ```text
//! (w/eps, r) - (u, curl r) + <lam, n x r>                                = 0
//! (w, curl v) + <n x w, v> + <P (u - lam), v> + (u, L*v + gamma v)
//!     + <(beta.n) lam, v>                                                = (f, v)
//! ```
//!
//! where `P = tau_t (I - n n^T) + tau_n n n^T` and `L*` is the dual advection.
//! On an interior facet the trace rows are the element's share of
//! `-<n x w_hat - beta x (n x lam) + (beta.u)_hat n, mu>`; on a boundary facet
//! they are `<T lam + chi_in (lam.n) n - chi_out tau_n ((u - lam).n) n, mu> = <g, mu>`
//! with `T = n x` (3D) or `I - n n^T` (2D).

use nalgebra::{DMatrix, DVector};

use super::{Discretization, LocalLayout};
use crate::basis::{curl_of_component, curl_of_w_component, n_cross_w_component, FacetTab};
use crate::error::Result;
use crate::vecops::{self, Vec3};

#[derive(Clone, Debug)]
pub struct LocalBlocks {
    pub element: usize,
    pub layout: LocalLayout,
    /// global facet ids of the local facets
    pub facets: Vec<usize>,
    /// interior block, rows `(r, v)`, columns `(w, u)`
    pub a: DMatrix<f64>,
    /// interior rows against trace columns
    pub b: DMatrix<f64>,
    /// trace rows against interior columns
    pub c: DMatrix<f64>,
    /// trace rows against trace columns
    pub d: DMatrix<f64>,
    /// interior right-hand side, `(0, (f, v))`
    pub f: DVector<f64>,
    /// boundary data `<g, mu>` on boundary facets
    pub g: DVector<f64>,
}

impl LocalBlocks {
    /// The (w, w) block.
    pub fn a_ww(&self) -> DMatrix<f64> {
        let nw = self.layout.nw();
        self.a.view((0, 0), (nw, nw)).into_owned()
    }

    /// The (u, u) block.
    pub fn a_uu(&self) -> DMatrix<f64> {
        let (nw, nu) = (self.layout.nw(), self.layout.nu());
        self.a.view((nw, nw), (nu, nu)).into_owned()
    }
}

/// `tau_t (I - n n^T) + tau_n n n^T`
fn penalty(dim: usize, n: &Vec3, tt: f64, tn: f64) -> [[f64; 3]; 3] {
    let mut p = [[0.0; 3]; 3];
    for i in 0..dim {
        for j in 0..dim {
            p[i][j] = (tn - tt) * n[i] * n[j] + if i == j { tt } else { 0.0 };
        }
    }
    p
}

/// Tangential boundary operator as a matrix.
fn tangential_matrix(dim: usize, n: &Vec3) -> [[f64; 3]; 3] {
    let mut t = [[0.0; 3]; 3];
    for c2 in 0..dim {
        let col = if dim == 2 {
            let mut e = [0.0; 3];
            e[c2] = 1.0;
            vecops::sub(&e, &vecops::scale(n[c2], n))
        } else {
            n_cross_w_component(n, c2, 3)
        };
        for c in 0..dim {
            t[c][c2] = col[c];
        }
    }
    t
}

pub fn assemble_local(disc: &Discretization, e: usize) -> Result<LocalBlocks> {
    let lay = disc.layout;
    let (dim, cw, nb) = (lay.dim, lay.cw, lay.nb);
    let spec = &disc.spec;
    let (ni, nl) = (lay.interior(), lay.trace());
    let mut a = DMatrix::zeros(ni, ni);
    let mut b = DMatrix::zeros(ni, nl);
    let mut c = DMatrix::zeros(nl, ni);
    let mut d = DMatrix::zeros(nl, nl);
    let mut f = DVector::zeros(ni);
    let mut g = DVector::zeros(nl);
    let inv_eps = 1.0 / spec.epsilon;

    let tab = disc.space.tabulate_element(&disc.mesh, e);
    let mut curl_w = vec![[0.0; 3]; cw * nb];
    let mut curl_v = vec![[0.0; 3]; dim * nb];
    for q in 0..tab.nq() {
        let wq = tab.w[q];
        let x = &tab.x[q];
        let phi = tab.phi_at(q);
        let grad = tab.grad_at(q);
        let beta = (spec.beta)(x);
        let gb = (spec.grad_beta)(x);
        let gamma = (spec.gamma)(x);
        let fx = (spec.f)(x);
        let div_beta: f64 = (0..dim).map(|i| gb[i][i]).sum();
        for i in 0..nb {
            for aa in 0..cw {
                curl_w[aa * nb + i] = curl_of_w_component(&grad[i], aa, dim);
            }
            for bb in 0..dim {
                curl_v[bb * nb + i] = curl_of_component(&grad[i], bb, dim);
            }
        }
        for i in 0..nb {
            let bdg = vecops::dot(&beta, &grad[i]);
            for j in 0..nb {
                let pij = wq * phi[i] * phi[j];
                for aa in 0..cw {
                    a[(lay.w_index(aa, i), lay.w_index(aa, j))] += inv_eps * pij;
                    let cr = &curl_w[aa * nb + i];
                    for bb in 0..dim {
                        a[(lay.w_index(aa, i), lay.u_index(bb, j))] -= wq * phi[j] * cr[bb];
                    }
                }
                for bb in 0..dim {
                    let cv = &curl_v[bb * nb + i];
                    for aa in 0..cw {
                        a[(lay.u_index(bb, i), lay.w_index(aa, j))] += wq * phi[j] * cv[aa];
                    }
                    // (u_j e_b2, L*(phi_i e_b) + gamma phi_i e_b)
                    for b2 in 0..dim {
                        let mut l = gb[b2][bb] * phi[i];
                        if b2 == bb {
                            l += -bdg - div_beta * phi[i] + gamma * phi[i];
                        }
                        a[(lay.u_index(bb, i), lay.u_index(b2, j))] += wq * phi[j] * l;
                    }
                }
            }
            for bb in 0..dim {
                f[lay.u_index(bb, i)] += wq * phi[i] * fx[bb];
            }
        }
    }

    let facet_tabs = disc.space.tabulate_facets(&disc.mesh, e);
    for ft in &facet_tabs {
        let (tt, tn) = disc.tau.get(e, ft.local);
        facet_terms(disc, ft, tt, tn, &mut a, &mut b, &mut c, &mut d, &mut g);
    }
    Ok(LocalBlocks {
        element: e,
        layout: lay,
        facets: facet_tabs.iter().map(|t| t.facet).collect(),
        a,
        b,
        c,
        d,
        f,
        g,
    })
}

#[allow(clippy::too_many_arguments)]
fn facet_terms(
    disc: &Discretization,
    ft: &FacetTab,
    tt: f64,
    tn: f64,
    a: &mut DMatrix<f64>,
    b: &mut DMatrix<f64>,
    c: &mut DMatrix<f64>,
    d: &mut DMatrix<f64>,
    g: &mut DVector<f64>,
) {
    let lay = disc.layout;
    let (dim, cw, nb, nf) = (lay.dim, lay.cw, lay.nb, lay.nf);
    let spec = &disc.spec;
    let n = ft.normal;
    let p = penalty(dim, &n, tt, tn);
    let t = tangential_matrix(dim, &n);
    let nx: Vec<Vec3> = (0..cw).map(|aa| n_cross_w_component(&n, aa, dim)).collect();
    let l = ft.local;
    for q in 0..ft.nq() {
        let wq = ft.w[q];
        let x = &ft.x[q];
        let phi = &ft.phi[q * nb..(q + 1) * nb];
        let psi = &ft.psi[q * nf..(q + 1) * nf];
        let bn = vecops::dot(&(spec.beta)(x), &n);
        for i in 0..nb {
            for j in 0..nb {
                let pij = wq * phi[i] * phi[j];
                for bb in 0..dim {
                    for aa in 0..cw {
                        a[(lay.u_index(bb, i), lay.w_index(aa, j))] += pij * nx[aa][bb];
                    }
                    for b2 in 0..dim {
                        a[(lay.u_index(bb, i), lay.u_index(b2, j))] += pij * p[bb][b2];
                    }
                }
            }
            for m in 0..nf {
                let pm = wq * phi[i] * psi[m];
                for cc in 0..dim {
                    let col = lay.trace_index(l, cc, m);
                    for aa in 0..cw {
                        b[(lay.w_index(aa, i), col)] += pm * nx[aa][cc];
                    }
                    for bb in 0..dim {
                        let delta = if bb == cc { bn } else { 0.0 };
                        b[(lay.u_index(bb, i), col)] += pm * (delta - p[bb][cc]);
                    }
                }
            }
        }
        if ft.boundary {
            let inflow = bn < 0.0;
            let gx = (spec.g)(x, &n);
            for m in 0..nf {
                for cc in 0..dim {
                    let row = lay.trace_index(l, cc, m);
                    g[row] += wq * psi[m] * gx[cc];
                    if !inflow {
                        for j in 0..nb {
                            for bb in 0..dim {
                                c[(row, lay.u_index(bb, j))] -= wq * psi[m] * phi[j] * tn * n[cc] * n[bb];
                            }
                        }
                    }
                    let nn = if inflow { 1.0 } else { tn };
                    for m2 in 0..nf {
                        for c2 in 0..dim {
                            d[(row, lay.trace_index(l, c2, m2))] +=
                                wq * psi[m] * psi[m2] * (t[cc][c2] + nn * n[cc] * n[c2]);
                        }
                    }
                }
            }
        } else {
            for m in 0..nf {
                for cc in 0..dim {
                    let row = lay.trace_index(l, cc, m);
                    for j in 0..nb {
                        let pm = wq * psi[m] * phi[j];
                        for aa in 0..cw {
                            c[(row, lay.w_index(aa, j))] -= pm * nx[aa][cc];
                        }
                        for bb in 0..dim {
                            c[(row, lay.u_index(bb, j))] -= pm * p[cc][bb];
                        }
                    }
                    for m2 in 0..nf {
                        let pp = wq * psi[m] * psi[m2];
                        for c2 in 0..dim {
                            let delta = if cc == c2 { bn } else { 0.0 };
                            d[(row, lay.trace_index(l, c2, m2))] += pp * (p[cc][c2] - delta);
                        }
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::QuadratureSettings;
    use crate::mesh::Mesh;
    use crate::problem::{constant_scalar, constant_vector, zero_boundary, zero_matrix, ProblemSpec};
    use std::sync::Arc;

    fn reference_triangle() -> Mesh {
        Mesh::from_elements(2, vec![[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]], vec![[0, 1, 2, 0]]).unwrap()
    }

    fn reaction_problem(dim: usize, f: Vec3) -> ProblemSpec {
        ProblemSpec {
            dim,
            epsilon: 1.0,
            beta: constant_vector([0.0; 3]),
            grad_beta: zero_matrix(),
            gamma: constant_scalar(1.0),
            f: constant_vector(f),
            g: zero_boundary(),
            exact_u: None,
            exact_curl_u: None,
            slit: None,
            description: "reaction".into(),
        }
    }

    #[test]
    fn block_sizes() {
        for (dim, k) in [(2, 0), (2, 2), (3, 1)] {
            let mesh = if dim == 2 {
                crate::mesh::build_unit_square_mesh(1, Default::default()).unwrap()
            } else {
                crate::mesh::build_unit_cube_mesh(1).unwrap()
            };
            let disc =
                Discretization::new(Arc::new(mesh), reaction_problem(dim, [0.0; 3]), k, QuadratureSettings::default())
                    .unwrap();
            let bl = assemble_local(&disc, 0).unwrap();
            let nb = crate::basis::poly_dim(k, dim);
            let (nw, nu) = if dim == 3 { (3 * nb, 3 * nb) } else { (nb, 2 * nb) };
            assert_eq!(bl.a_ww().nrows(), nw);
            assert_eq!(bl.a_uu().nrows(), nu);
            assert_eq!(bl.d.nrows(), (dim + 1) * dim * crate::basis::poly_dim(k, dim - 1));
        }
    }

    #[test]
    fn reaction_block_on_reference_element() {
        let mesh = reference_triangle();
        // without facet terms the volume (u,u) block is gamma times the mass matrix
        let disc = Discretization::new(Arc::new(mesh), reaction_problem(2, [0.0; 3]), 0, QuadratureSettings::default())
            .unwrap();
        let mut tau = disc.tau.clone();
        for l in 0..3 {
            tau.set(0, l, (0.0, 0.0));
        }
        let disc = disc.with_stabilization(tau);
        let bl = assemble_local(&disc, 0).unwrap();
        let auu = bl.a_uu();
        for i in 0..2 {
            for j in 0..2 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((auu[(i, j)] - e).abs() < 1e-14);
            }
        }
        assert!(bl.f.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn pure_reaction_interior_block_is_spd_with_beta_zero() {
        let mesh = crate::mesh::build_unit_square_mesh(2, Default::default()).unwrap();
        let disc = Discretization::new(Arc::new(mesh), reaction_problem(2, [1.0, 2.0, 0.0]), 1, QuadratureSettings::default())
            .unwrap();
        let bl = assemble_local(&disc, 3).unwrap();
        for blk in [bl.a_ww(), bl.a_uu()] {
            let sym = (&blk - blk.transpose()).amax();
            assert!(sym < 1e-12);
            assert!(blk.symmetric_eigenvalues().min() > 0.0);
        }
    }
}
