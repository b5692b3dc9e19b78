//! Element fields recovered from the trace solution.

use std::sync::Arc;

use nalgebra::DVector;
use rayon::prelude::*;

use super::condense::CondensedElement;
use super::Discretization;
use crate::basis::curl_of_component;
use crate::error::{HdgError, Result};
use crate::vecops::{self, Vec3};

/// Discrete solution `(w_h, u_h, lambda_h)` as coefficient vectors.
#[derive(Clone, Debug)]
pub struct FieldSolution {
    pub disc: Arc<Discretization>,
    /// per element, `cw * nb` coefficients
    pub w: Vec<Vec<f64>>,
    /// per element, `dim * nb` coefficients
    pub u: Vec<Vec<f64>>,
    /// global trace vector
    pub lambda: Vec<f64>,
}

impl FieldSolution {
    pub fn dim(&self) -> usize {
        self.disc.layout.dim
    }

    /// Trace coefficients of element `e` in local facet order.
    pub fn local_trace(&self, e: usize) -> DVector<f64> {
        let lay = self.disc.layout;
        let per = lay.per_facet();
        let facets = self.disc.mesh.element_facets(e);
        DVector::from_iterator(
            lay.trace(),
            (0..lay.trace()).map(|li| self.lambda[facets[li / per] * per + li % per]),
        )
    }

    /// Trace coefficients on facet `f`, component-major.
    pub fn facet_trace(&self, f: usize) -> &[f64] {
        let per = self.disc.layout.per_facet();
        &self.lambda[f * per..(f + 1) * per]
    }

    pub(crate) fn combine(coeffs: &[f64], comps: usize, phi: &[f64]) -> Vec3 {
        let nb = phi.len();
        let mut out = [0.0; 3];
        for (c, o) in out.iter_mut().enumerate().take(comps) {
            *o = (0..nb).map(|i| coeffs[c * nb + i] * phi[i]).sum();
        }
        out
    }

    /// `u_h` on element `e` at basis values `phi`.
    pub fn u_from_basis(&self, e: usize, phi: &[f64]) -> Vec3 {
        Self::combine(&self.u[e], self.disc.layout.dim, phi)
    }

    /// `w_h` on element `e` at basis values `phi`; in 2D only the first
    /// component is nonzero.
    pub fn w_from_basis(&self, e: usize, phi: &[f64]) -> Vec3 {
        Self::combine(&self.w[e], self.disc.layout.cw, phi)
    }

    /// Elementwise curl of `u_h` from physical basis gradients.
    pub fn curl_u_from_basis(&self, e: usize, grad: &[Vec3]) -> Vec3 {
        let lay = self.disc.layout;
        let mut out = [0.0; 3];
        for b in 0..lay.dim {
            for (i, g) in grad.iter().enumerate() {
                out = vecops::add(&out, &vecops::scale(self.u[e][b * lay.nb + i], &curl_of_component(g, b, lay.dim)));
            }
        }
        out
    }

    pub fn eval_u(&self, e: usize, x: &Vec3) -> Vec3 {
        let (phi, _) = self.disc.space.eval_physical(self.disc.mesh.geometry(e), x);
        self.u_from_basis(e, &phi)
    }

    pub fn eval_w(&self, e: usize, x: &Vec3) -> Vec3 {
        let (phi, _) = self.disc.space.eval_physical(self.disc.mesh.geometry(e), x);
        self.w_from_basis(e, &phi)
    }

    /// `lambda_h` on facet `f` at a point of that facet.
    pub fn eval_lambda(&self, f: usize, x: &Vec3) -> Vec3 {
        let psi = self.disc.space.eval_facet_physical(&self.disc.mesh, f, x);
        Self::combine(self.facet_trace(f), self.disc.layout.dim, &psi)
    }

    /// Largest component magnitude of `u_h` over the element quadrature points.
    pub fn max_abs_u(&self) -> f64 {
        (0..self.u.len())
            .map(|e| {
                let tab = self.disc.space.tabulate_element(&self.disc.mesh, e);
                (0..tab.nq())
                    .map(|q| vecops::max_abs(&self.u_from_basis(e, tab.phi_at(q))))
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }
}

/// Recovers `(w_h, u_h)` on every element from the global trace.
pub fn recover_fields(
    disc: Arc<Discretization>,
    condensed: &[CondensedElement],
    lambda: Vec<f64>,
) -> Result<FieldSolution> {
    if let Some(i) = lambda.iter().position(|v| !v.is_finite()) {
        return Err(HdgError::Numerical(format!("non-finite trace value at dof {i}")));
    }
    let lay = disc.layout;
    let mut sol = FieldSolution {
        disc: disc.clone(),
        w: Vec::new(),
        u: Vec::new(),
        lambda,
    };
    let fields: Vec<(Vec<f64>, Vec<f64>)> = condensed
        .par_iter()
        .map(|ce| {
            let x = ce.recover(&sol.local_trace(ce.element));
            let (w, u) = x.as_slice().split_at(lay.nw());
            (w.to_vec(), u.to_vec())
        })
        .collect();
    for (e, (w, u)) in fields.into_iter().enumerate() {
        if w.iter().chain(&u).any(|v| !v.is_finite()) {
            return Err(HdgError::Numerical(format!("non-finite field on element {e}")));
        }
        sol.w.push(w);
        sol.u.push(u);
    }
    Ok(sol)
}
