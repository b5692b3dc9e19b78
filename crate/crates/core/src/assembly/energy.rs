//! Discrete energy balance of the scheme under homogeneous boundary data.
//!
//! Testing the scheme with the discrete solution itself gives
//!
//! ```text
//! |w|^2/eps + sum <(tau_t - bn/2) |(u - lam)_t|^2> + <(tau_n - bn/2) ((u - lam).n)^2>
//!     + 1/2 <bn (lam.n)^2>_outflow + (R u, u) = (f, u)
//! ```
//!
//! with `R = (gamma - div beta / 2) I + (grad beta + grad beta^T) / 2`. The
//! facet sums run over element sides. The balance is exact whenever the
//! quadrature integrates the advection term by parts exactly, e.g. for affine
//! `beta`.

use super::FieldSolution;
use crate::vecops;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyIdentity {
    pub vorticity: f64,
    pub jumps: f64,
    pub outflow: f64,
    pub reaction: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `|lhs - rhs| / max(|rhs|, 1e-300)`
    pub residual: f64,
}

pub fn energy_identity(sol: &FieldSolution) -> EnergyIdentity {
    let disc = &sol.disc;
    let spec = &disc.spec;
    let dim = disc.layout.dim;
    let (mut vort, mut jumps, mut outflow, mut reaction, mut rhs) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for e in 0..disc.mesh.num_elements() {
        let tab = disc.space.tabulate_element(&disc.mesh, e);
        for q in 0..tab.nq() {
            let x = &tab.x[q];
            let u = sol.u_from_basis(e, tab.phi_at(q));
            let w = sol.w_from_basis(e, tab.phi_at(q));
            let gb = (spec.grad_beta)(x);
            let div: f64 = (0..dim).map(|i| gb[i][i]).sum();
            let mut ru = vecops::scale((spec.gamma)(x) - 0.5 * div, &u);
            for i in 0..dim {
                for j in 0..dim {
                    ru[i] += 0.5 * (gb[i][j] + gb[j][i]) * u[j];
                }
            }
            vort += tab.w[q] * vecops::dot(&w, &w) / spec.epsilon;
            reaction += tab.w[q] * vecops::dot(&ru, &u);
            rhs += tab.w[q] * vecops::dot(&(spec.f)(x), &u);
        }
        for ft in disc.space.tabulate_facets(&disc.mesh, e) {
            let (tt, tn) = disc.tau.get(e, ft.local);
            let n = ft.normal;
            let lam_c = sol.facet_trace(ft.facet);
            for q in 0..ft.nq() {
                let x = &ft.x[q];
                let bn = vecops::dot(&(spec.beta)(x), &n);
                let u = FieldSolution::combine(&sol.u[e], dim, &ft.phi[q * disc.layout.nb..(q + 1) * disc.layout.nb]);
                let lam = FieldSolution::combine(lam_c, dim, &ft.psi[q * disc.layout.nf..(q + 1) * disc.layout.nf]);
                let jump = vecops::sub(&u, &lam);
                let jn = vecops::dot(&jump, &n);
                let jt2 = vecops::dot(&jump, &jump) - jn * jn;
                jumps += ft.w[q] * ((tt - 0.5 * bn) * jt2 + (tn - 0.5 * bn) * jn * jn);
                if ft.boundary && bn >= 0.0 {
                    let ln = vecops::dot(&lam, &n);
                    outflow += 0.5 * ft.w[q] * bn * ln * ln;
                }
            }
        }
    }
    let lhs = vort + jumps + outflow + reaction;
    EnergyIdentity {
        vorticity: vort,
        jumps,
        outflow,
        reaction,
        lhs,
        rhs,
        residual: (lhs - rhs).abs() / rhs.abs().max(1e-300),
    }
}
