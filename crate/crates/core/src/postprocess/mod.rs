//! Elementwise postprocessing of `u_h` into a degree `k + 1` field whose
//! curl matches `w_h / eps`.
//!
//! Two schemes are provided: [`postprocess_star_2d`], driven by edge moments
//! of the rotated normal component and a divergence constraint, and
//! [`postprocess_curlfit`], which fits the curl against `curl P_{k+1}` and
//! keeps the gradient moments of `u_h`.

mod curlfit;
mod star;

pub use curlfit::{curlfit_system, postprocess_curlfit};
pub use star::{postprocess_star_2d, star_system};

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::assembly::{Discretization, FieldSolution};
use crate::basis::{build_curl_range_basis, curl_of_component, ReferenceSpace};
use crate::error::{HdgError, Result};
use crate::linsolve::DenseLu;
use crate::vecops::{self, Vec3};

/// Relative pivot below which a local postprocessing system counts as singular.
pub const LOCAL_PIVOT_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PostKind {
    Star2d,
    Curlfit,
}

impl PostKind {
    pub fn name(self) -> &'static str {
        match self {
            PostKind::Star2d => "star2d",
            PostKind::Curlfit => "curlfit",
        }
    }
}

/// A discontinuous degree `k + 1` vector field, one coefficient vector per
/// element (component-major in the orthonormal element basis).
#[derive(Clone, Debug)]
pub struct PostField {
    pub kind: PostKind,
    pub disc: Arc<Discretization>,
    /// degree `k + 1` space on the quadrature rules of `disc`
    pub space: ReferenceSpace,
    pub coeffs: Vec<Vec<f64>>,
    /// largest relative residual of the local solves
    pub max_residual: f64,
}

impl PostField {
    pub fn degree(&self) -> usize {
        self.space.degree
    }

    pub fn value_from_basis(&self, e: usize, phi: &[f64]) -> Vec3 {
        let nb = phi.len();
        let mut out = [0.0; 3];
        for (c, o) in out.iter_mut().enumerate().take(self.space.dim) {
            *o = (0..nb).map(|i| self.coeffs[e][c * nb + i] * phi[i]).sum();
        }
        out
    }

    pub fn curl_from_basis(&self, e: usize, grad: &[Vec3]) -> Vec3 {
        let nb = grad.len();
        let mut out = [0.0; 3];
        for c in 0..self.space.dim {
            for (i, g) in grad.iter().enumerate() {
                out = vecops::add(&out, &vecops::scale(self.coeffs[e][c * nb + i], &curl_of_component(g, c, self.space.dim)));
            }
        }
        out
    }

    pub fn eval(&self, e: usize, x: &Vec3) -> Vec3 {
        let (phi, _) = self.space.eval_physical(self.disc.mesh.geometry(e), x);
        self.value_from_basis(e, &phi)
    }
}

/// The degree `k + 1` space sharing the quadrature points of `disc`.
pub(crate) fn post_space(disc: &Discretization) -> Result<ReferenceSpace> {
    ReferenceSpace::new(
        disc.layout.dim,
        disc.k + 1,
        disc.space.element_rule.degree,
        disc.space.facet_rule.degree,
    )
}

/// Solves one local system, reporting the element on failure. Returns the
/// solution and its relative residual.
pub(crate) fn solve_local(element: usize, a: &DMatrix<f64>, b: &DVector<f64>) -> Result<(Vec<f64>, f64)> {
    let lu = DenseLu::factor_with_tolerance(a, LOCAL_PIVOT_TOLERANCE).map_err(|e| HdgError::Postprocess {
        element,
        reason: format!("local system: {e}"),
    })?;
    let x = lu.solve(b.as_slice());
    let r = a * DVector::from_column_slice(&x) - b;
    let res = r.amax() / b.amax().max(f64::MIN_POSITIVE);
    if x.iter().any(|v| !v.is_finite()) {
        return Err(HdgError::Postprocess {
            element,
            reason: "non-finite coefficients".into(),
        });
    }
    Ok((x, if b.amax() == 0.0 { r.amax() } else { res }))
}

/// Largest deviation, over all elements, between the moments of
/// `curl u_post` and of `w_h / eps` against the test space of the curl
/// identity: all of `P_k` in 2D, `curl P_{k+1}` in 3D. Relative to the largest
/// moment of `w_h / eps`.
pub fn curl_identity_residual(post: &PostField, sol: &FieldSolution) -> Result<f64> {
    let disc = &post.disc;
    let lay = disc.layout;
    let inv_eps = 1.0 / disc.spec.epsilon;
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for e in 0..disc.mesh.num_elements() {
        let tk = disc.space.tabulate_element(&disc.mesh, e);
        let tp = post.space.tabulate_element(&disc.mesh, e);
        // moments against the orthonormal P_k^{cw} basis
        let mut diff = vec![0.0; lay.nw()];
        for q in 0..tk.nq() {
            let c = post.curl_from_basis(e, tp.grad_at(q));
            let phi = tk.phi_at(q);
            for a in 0..lay.cw {
                for j in 0..lay.nb {
                    diff[a * lay.nb + j] += tk.w[q] * c[a] * phi[j];
                }
            }
        }
        for (d, w) in diff.iter_mut().zip(&sol.w[e]) {
            *d -= inv_eps * w;
            scale = scale.max((inv_eps * w).abs());
        }
        if lay.dim == 2 {
            worst = worst.max(vecops_max(&diff));
        } else {
            let crb = build_curl_range_basis(3, disc.k, disc.mesh.geometry(e))?;
            for r in &crb.curl {
                let m: f64 = r.iter().zip(&diff).map(|(a, b)| a * b).sum();
                worst = worst.max(m.abs());
            }
        }
    }
    Ok(worst / scale.max(f64::MIN_POSITIVE))
}

/// Largest moment `(u_post - u_h, grad v)` over `v` in `P_{k+2}` and all
/// elements, relative to the largest moment of `u_h`.
pub fn gradient_moment_residual(post: &PostField, sol: &FieldSolution) -> Result<f64> {
    let disc = &post.disc;
    let dim = disc.layout.dim;
    let top = ReferenceSpace::new(dim, disc.k + 2, disc.space.element_rule.degree, disc.space.facet_rule.degree)?;
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for e in 0..disc.mesh.num_elements() {
        let tk = disc.space.tabulate_element(&disc.mesh, e);
        let tp = post.space.tabulate_element(&disc.mesh, e);
        let tt = top.tabulate_element(&disc.mesh, e);
        let mut m = vec![0.0; top.nb()];
        let mut mu = vec![0.0; top.nb()];
        for q in 0..tk.nq() {
            let uh = sol.u_from_basis(e, tk.phi_at(q));
            let d = vecops::sub(&post.value_from_basis(e, tp.phi_at(q)), &uh);
            for (j, g) in tt.grad_at(q).iter().enumerate() {
                m[j] += tk.w[q] * vecops::dot(&d, g);
                mu[j] += tk.w[q] * vecops::dot(&uh, g);
            }
        }
        worst = worst.max(vecops_max(&m));
        scale = scale.max(vecops_max(&mu));
    }
    Ok(worst / scale.max(f64::MIN_POSITIVE))
}

fn vecops_max(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}
