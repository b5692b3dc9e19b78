//! Error norms against exact solutions and experimental orders of
//! convergence.
//!
//! All exact-solution integrals use rules of degree `2k + 6` (or the
//! configured override). Element contributions are computed in parallel and
//! summed in element order, so results are deterministic.

use rayon::prelude::*;
use serde::Serialize;

use crate::assembly::{Discretization, FieldSolution};
use crate::basis::{ElementTab, ReferenceSpace};
use crate::error::{HdgError, Result};
use crate::postprocess::PostField;
use crate::problem::VectorFn;
use crate::vecops::{self, Vec3};

fn exact_fns(disc: &Discretization) -> Result<(VectorFn, VectorFn)> {
    match (&disc.spec.exact_u, &disc.spec.exact_curl_u) {
        (Some(u), Some(c)) => Ok((u.clone(), c.clone())),
        _ => Err(HdgError::Unsupported(format!(
            "no exact solution for '{}'",
            disc.spec.description
        ))),
    }
}

fn norms_space(disc: &Discretization, degree: usize) -> Result<ReferenceSpace> {
    let q = disc.quadrature.norms_degree(disc.k);
    ReferenceSpace::new(disc.layout.dim, degree, q, q)
}

fn element_sum<F>(disc: &Discretization, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let parts: Vec<f64> = (0..disc.mesh.num_elements()).into_par_iter().map(f).collect();
    parts.iter().sum()
}

fn volume_integral<G>(tab: &ElementTab, g: G) -> f64
where
    G: Fn(usize) -> f64,
{
    (0..tab.nq()).map(|q| tab.w[q] * g(q)).sum()
}

fn sq(v: &Vec3) -> f64 {
    vecops::dot(v, v)
}

/// `||u - u_h||` over the domain.
pub fn l2_error_u(sol: &FieldSolution) -> Result<f64> {
    let disc = &sol.disc;
    let (u, _) = exact_fns(disc)?;
    let space = norms_space(disc, disc.k)?;
    Ok(element_sum(disc, |e| {
        let tab = space.tabulate_element(&disc.mesh, e);
        volume_integral(&tab, |q| sq(&vecops::sub(&u(&tab.x[q]), &sol.u_from_basis(e, tab.phi_at(q)))))
    })
    .sqrt())
}

/// `||eps^{-1} (w - w_h)||`, i.e. the error of `w_h / eps` as an
/// approximation of `curl u`.
pub fn w_scaled_error(sol: &FieldSolution) -> Result<f64> {
    let disc = &sol.disc;
    let (_, cu) = exact_fns(disc)?;
    let inv_eps = 1.0 / disc.spec.epsilon;
    let space = norms_space(disc, disc.k)?;
    Ok(element_sum(disc, |e| {
        let tab = space.tabulate_element(&disc.mesh, e);
        volume_integral(&tab, |q| {
            sq(&vecops::sub(&cu(&tab.x[q]), &vecops::scale(inv_eps, &sol.w_from_basis(e, tab.phi_at(q)))))
        })
    })
    .sqrt())
}

/// Broken seminorm `(sum_T ||curl(u - u_h)||_T^2)^{1/2}`.
pub fn hcurl_error(sol: &FieldSolution) -> Result<f64> {
    let disc = &sol.disc;
    let (_, cu) = exact_fns(disc)?;
    let space = norms_space(disc, disc.k)?;
    Ok(element_sum(disc, |e| {
        let tab = space.tabulate_element(&disc.mesh, e);
        volume_integral(&tab, |q| sq(&vecops::sub(&cu(&tab.x[q]), &sol.curl_u_from_basis(e, tab.grad_at(q)))))
    })
    .sqrt())
}

/// Broken curl seminorm error of a postprocessed field.
pub fn hcurl_error_post(post: &PostField) -> Result<f64> {
    let disc = &post.disc;
    let (_, cu) = exact_fns(disc)?;
    let space = norms_space(disc, post.degree())?;
    Ok(element_sum(disc, |e| {
        let tab = space.tabulate_element(&disc.mesh, e);
        volume_integral(&tab, |q| sq(&vecops::sub(&cu(&tab.x[q]), &post.curl_from_basis(e, tab.grad_at(q)))))
    })
    .sqrt())
}

/// L2 error of a postprocessed field.
pub fn l2_error_post(post: &PostField) -> Result<f64> {
    let disc = &post.disc;
    let (u, _) = exact_fns(disc)?;
    let space = norms_space(disc, post.degree())?;
    Ok(element_sum(disc, |e| {
        let tab = space.tabulate_element(&disc.mesh, e);
        volume_integral(&tab, |q| sq(&vecops::sub(&u(&tab.x[q]), &post.value_from_basis(e, tab.phi_at(q)))))
    })
    .sqrt())
}

/// The energy norm of `(w - w_h, u - u_h, u - lam_h)`:
///
/// ```text
/// ( ||eps^{-1/2} r||^2 + ||v||^2 + sum_{dT} || |tau_t - bn/2|^{1/2} (v - mu) x n ||^2
///     + || |tau_n - bn/2|^{1/2} (v - mu) . n ||^2 )^{1/2}
/// ```
///
/// with facet terms accumulated per element side.
pub fn energy_error(sol: &FieldSolution) -> Result<f64> {
    let disc = &sol.disc;
    let (u, cu) = exact_fns(disc)?;
    let eps = disc.spec.epsilon;
    let dim = disc.layout.dim;
    let space = norms_space(disc, disc.k)?;
    let (nb, nf) = (space.nb(), space.nf());
    Ok(element_sum(disc, |e| {
        let tab = space.tabulate_element(&disc.mesh, e);
        let mut s = volume_integral(&tab, |q| {
            let x = &tab.x[q];
            let dw = vecops::sub(&vecops::scale(eps, &cu(x)), &sol.w_from_basis(e, tab.phi_at(q)));
            let du = vecops::sub(&u(x), &sol.u_from_basis(e, tab.phi_at(q)));
            sq(&dw) / eps + sq(&du)
        });
        for ft in space.tabulate_facets(&disc.mesh, e) {
            let (tt, tn) = disc.tau.get(e, ft.local);
            let n = ft.normal;
            let lam_c = sol.facet_trace(ft.facet);
            for q in 0..ft.nq() {
                let x = &ft.x[q];
                let ux = u(x);
                let v = vecops::sub(&ux, &FieldSolution::combine(&sol.u[e], dim, &ft.phi[q * nb..(q + 1) * nb]));
                let mu = vecops::sub(&ux, &FieldSolution::combine(lam_c, dim, &ft.psi[q * nf..(q + 1) * nf]));
                let j = vecops::sub(&v, &mu);
                let jn = vecops::dot(&j, &n);
                let jt2 = (sq(&j) - jn * jn).max(0.0);
                let bn = vecops::dot(&(disc.spec.beta)(x), &n);
                s += ft.w[q] * ((tt - 0.5 * bn).abs() * jt2 + (tn - 0.5 * bn).abs() * jn * jn);
            }
        }
        s
    })
    .sqrt())
}

/// Orders `log(e_{i-1}/e_i) / log(h_{i-1}/h_i)` between consecutive levels;
/// `None` when either error is not positive and finite.
pub fn eoc(errors: &[f64], hs: &[f64]) -> Vec<Option<f64>> {
    errors
        .windows(2)
        .zip(hs.windows(2))
        .map(|(e, h)| {
            let ok = |v: f64| v > 0.0 && v.is_finite();
            if ok(e[0]) && ok(e[1]) && h[0] > h[1] && h[1] > 0.0 {
                Some((e[0] / e[1]).ln() / (h[0] / h[1]).ln())
            } else {
                None
            }
        })
        .collect()
}

/// Errors on one refinement level.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorRow {
    pub level: usize,
    pub n: usize,
    pub h: f64,
    pub dofs: usize,
    pub err_energy: f64,
    pub err_l2_u: f64,
    pub err_w_scaled: f64,
    pub err_hc_u: f64,
    pub err_hc_star: Option<f64>,
    pub err_hc_curlfit: Option<f64>,
}

/// Error columns of the convergence table.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorColumn {
    Energy,
    L2U,
    WScaled,
    HcU,
    HcStar,
    HcCurlfit,
}

impl ErrorColumn {
    pub const ALL: [ErrorColumn; 6] = [
        ErrorColumn::Energy,
        ErrorColumn::L2U,
        ErrorColumn::WScaled,
        ErrorColumn::HcU,
        ErrorColumn::HcStar,
        ErrorColumn::HcCurlfit,
    ];

    /// Suffix of the `err_*` / `ord_*` column names.
    pub fn name(self) -> &'static str {
        match self {
            ErrorColumn::Energy => "energy",
            ErrorColumn::L2U => "l2_u",
            ErrorColumn::WScaled => "w_scaled",
            ErrorColumn::HcU => "hc_u",
            ErrorColumn::HcStar => "hc_star",
            ErrorColumn::HcCurlfit => "hc_curlfit",
        }
    }

    pub fn get(self, row: &ErrorRow) -> Option<f64> {
        match self {
            ErrorColumn::Energy => Some(row.err_energy),
            ErrorColumn::L2U => Some(row.err_l2_u),
            ErrorColumn::WScaled => Some(row.err_w_scaled),
            ErrorColumn::HcU => Some(row.err_hc_u),
            ErrorColumn::HcStar => row.err_hc_star,
            ErrorColumn::HcCurlfit => row.err_hc_curlfit,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ErrorReport {
    pub experiment: usize,
    pub k: usize,
    pub epsilon: f64,
    pub rows: Vec<ErrorRow>,
}

impl ErrorReport {
    pub fn hs(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.h).collect()
    }

    /// Whether every row carries the column.
    pub fn has(&self, col: ErrorColumn) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(|r| col.get(r).is_some())
    }

    pub fn errors(&self, col: ErrorColumn) -> Vec<f64> {
        self.rows.iter().map(|r| col.get(r).unwrap_or(f64::NAN)).collect()
    }

    /// Orders for a column; entry `i` belongs to row `i + 1`.
    pub fn orders(&self, col: ErrorColumn) -> Vec<Option<f64>> {
        eoc(&self.errors(col), &self.hs())
    }

    /// Order between the last two levels.
    pub fn final_order(&self, col: ErrorColumn) -> Option<f64> {
        self.orders(col).last().copied().flatten()
    }
}
