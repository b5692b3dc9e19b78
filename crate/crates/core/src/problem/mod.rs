//! Problem data: coefficients, sources, boundary data and exact solutions,
//! the advection operators, stabilization parameters and the experiment
//! catalog.
//!
//! All callbacks take physical points as [`Vec3`]; in 2D the third
//! coordinate and the third vector component are zero. Jacobians follow the
//! `m[i][j] = d_j v_i` convention.

mod catalog;
mod poly;
mod stabilization;

pub use catalog::{experiment_catalog, experiment_problem, Experiment, MeshFamily};
pub use poly::{Poly, VectorPoly};
pub use stabilization::{audit_stabilization, default_stabilization, AuditReport, StabilizationParams, TAU_N_FLOOR};

use std::fmt;
use std::sync::Arc;

use nalgebra::{Matrix2, Matrix3};

use crate::error::{HdgError, Result};
use crate::vecops::{self, Mat3, Vec3};

pub type ScalarFn = Arc<dyn Fn(&Vec3) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(&Vec3) -> Vec3 + Send + Sync>;
pub type MatrixFn = Arc<dyn Fn(&Vec3) -> Mat3 + Send + Sync>;
/// Boundary data `g(x, n)` at a boundary point `x` with outward normal `n`.
pub type BoundaryFn = Arc<dyn Fn(&Vec3, &Vec3) -> Vec3 + Send + Sync>;

/// Strong constraint of the trace on the facets covering a segment.
#[derive(Clone)]
pub struct SlitConstraint {
    pub from: Vec3,
    pub to: Vec3,
    pub value: VectorFn,
}

#[derive(Clone)]
pub struct ProblemSpec {
    pub dim: usize,
    pub epsilon: f64,
    pub beta: VectorFn,
    pub grad_beta: MatrixFn,
    pub gamma: ScalarFn,
    pub f: VectorFn,
    pub g: BoundaryFn,
    pub exact_u: Option<VectorFn>,
    pub exact_curl_u: Option<VectorFn>,
    pub slit: Option<SlitConstraint>,
    pub description: String,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("dim", &self.dim)
            .field("epsilon", &self.epsilon)
            .field("exact", &self.exact_u.is_some())
            .field("slit", &self.slit.is_some())
            .field("description", &self.description)
            .finish()
    }
}

pub fn constant_vector(v: Vec3) -> VectorFn {
    Arc::new(move |_| v)
}

pub fn constant_scalar(v: f64) -> ScalarFn {
    Arc::new(move |_| v)
}

/// Zero Jacobian, for constant velocity fields.
pub fn zero_matrix() -> MatrixFn {
    Arc::new(|_| [[0.0; 3]; 3])
}

pub fn zero_boundary() -> BoundaryFn {
    Arc::new(|_, _| [0.0; 3])
}

/// Tangential boundary operator: `n x u` in 3D, `(Rn . u) Rn` in 2D.
pub fn tangential_trace(dim: usize, n: &Vec3, u: &Vec3) -> Vec3 {
    if dim == 2 {
        let rn = vecops::rotate(n);
        vecops::scale(vecops::dot(&rn, u), &rn)
    } else {
        vecops::cross(n, u)
    }
}

/// Boundary data `T(u) + chi_in (u . n) n` generated by a Dirichlet function,
/// with inflow decided pointwise by the sign of `beta . n`.
pub fn boundary_from_dirichlet(dim: usize, beta: VectorFn, u: VectorFn) -> BoundaryFn {
    Arc::new(move |x, n| {
        let ux = u(x);
        let mut g = tangential_trace(dim, n, &ux);
        if vecops::dot(&beta(x), n) < 0.0 {
            let un = vecops::dot(&ux, n);
            g = vecops::add(&g, &vecops::scale(un, n));
        }
        g
    })
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<()> {
        if !(2..=3).contains(&self.dim) {
            return Err(HdgError::InvalidArgument(format!("dimension {} not supported", self.dim)));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(HdgError::InvalidArgument(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }

    pub fn has_exact(&self) -> bool {
        self.exact_u.is_some() && self.exact_curl_u.is_some()
    }

    /// `w = eps curl u` of the exact solution.
    pub fn exact_w(&self, x: &Vec3) -> Option<Vec3> {
        self.exact_curl_u.as_ref().map(|c| vecops::scale(self.epsilon, &c(x)))
    }

    /// Manufactured problem with a polynomial exact solution: `f` and `g` are
    /// computed from `u` exactly.
    pub fn manufactured(
        dim: usize,
        epsilon: f64,
        beta: VectorFn,
        grad_beta: MatrixFn,
        gamma: ScalarFn,
        u: VectorPoly,
        description: &str,
    ) -> Self {
        let u = Arc::new(u);
        let (ub, bb, gbb, gb) = (u.clone(), beta.clone(), grad_beta.clone(), gamma.clone());
        let f: VectorFn = Arc::new(move |x| {
            let cc = ub.curl_curl(x, dim);
            strong_operator(dim, epsilon, &bb(x), &gbb(x), gb(x), &ub.eval(x), &ub.jacobian(x), &cc)
        });
        let (ue, uc) = (u.clone(), u.clone());
        let exact_u: VectorFn = Arc::new(move |x| ue.eval(x));
        let exact_curl: VectorFn = Arc::new(move |x| crate::basis::curl_eval(&uc.jacobian(x), dim));
        Self {
            dim,
            epsilon,
            g: boundary_from_dirichlet(dim, beta.clone(), exact_u.clone()),
            beta,
            grad_beta,
            gamma,
            f,
            exact_u: Some(exact_u),
            exact_curl_u: Some(exact_curl),
            slit: None,
            description: description.to_string(),
        }
    }
}

/// `L_beta u = -beta x curl u + grad(beta . u)`.
pub fn lie_advection_apply(beta: &Vec3, grad_beta: &Mat3, u: &Vec3, grad_u: &Mat3, dim: usize) -> Vec3 {
    let mut out = [0.0; 3];
    for i in 0..dim {
        for j in 0..dim {
            out[i] += grad_beta[j][i] * u[j] + grad_u[j][i] * beta[j];
        }
    }
    let c = crate::basis::curl_eval(grad_u, dim);
    let bxc = if dim == 2 {
        [beta[1] * c[0], -beta[0] * c[0], 0.0]
    } else {
        vecops::cross(beta, &c)
    };
    vecops::sub(&out, &bxc)
}

/// The formal dual `curl(beta x v) - beta div v`, expanded by the product
/// rule as `(grad beta) v - (grad v) beta - (div beta) v`.
pub fn dual_advection_apply(beta: &Vec3, grad_beta: &Mat3, v: &Vec3, grad_v: &Mat3, dim: usize) -> Vec3 {
    let div_beta: f64 = (0..dim).map(|i| grad_beta[i][i]).sum();
    let mut out = [0.0; 3];
    for i in 0..dim {
        for j in 0..dim {
            out[i] += grad_beta[i][j] * v[j] - grad_v[i][j] * beta[j];
        }
        out[i] -= div_beta * v[i];
    }
    out
}

/// Residual of the strong equation: `eps curlcurl u + L_beta u + gamma u`,
/// with `curlcurl` the precomputed second-order term.
#[allow(clippy::too_many_arguments)]
pub fn strong_operator(
    dim: usize,
    epsilon: f64,
    beta: &Vec3,
    grad_beta: &Mat3,
    gamma: f64,
    u: &Vec3,
    grad_u: &Mat3,
    curlcurl: &Vec3,
) -> Vec3 {
    let lie = lie_advection_apply(beta, grad_beta, u, grad_u, dim);
    let mut f = [0.0; 3];
    for i in 0..dim {
        f[i] = epsilon * curlcurl[i] + lie[i] + gamma * u[i];
    }
    f
}

/// Smallest eigenvalue of `(gamma - div beta / 2) I + (grad beta + grad beta^T) / 2`.
pub fn friedrichs_min_eig(beta_grad: &Mat3, gamma: f64, dim: usize) -> f64 {
    let div: f64 = (0..dim).map(|i| beta_grad[i][i]).sum();
    let entry = |i: usize, j: usize| {
        let d = if i == j { gamma - 0.5 * div } else { 0.0 };
        d + 0.5 * (beta_grad[i][j] + beta_grad[j][i])
    };
    if dim == 2 {
        let m = Matrix2::from_fn(entry);
        m.symmetric_eigenvalues().min()
    } else {
        let m = Matrix3::from_fn(entry);
        m.symmetric_eigenvalues().min()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fd_jacobian(f: &dyn Fn(&Vec3) -> Vec3, x: &Vec3, dim: usize) -> Mat3 {
        let h = 1e-6;
        let mut m = [[0.0; 3]; 3];
        for j in 0..dim {
            let (mut xp, mut xm) = (*x, *x);
            xp[j] += h;
            xm[j] -= h;
            let (a, b) = (f(&xp), f(&xm));
            for i in 0..dim {
                m[i][j] = (a[i] - b[i]) / (2.0 * h);
            }
        }
        m
    }

    #[test]
    fn dual_advection_constant_inputs_vanish() {
        let r = dual_advection_apply(&[1.0, 2.0, 3.0], &[[0.0; 3]; 3], &[4.0, 5.0, 6.0], &[[0.0; 3]; 3], 3);
        assert_eq!(r, [0.0; 3]);
    }

    #[test]
    fn dual_advection_linear_field_matches_fd() {
        // beta = (1,2,3), v = (x,y,z): curl(beta x v) - 3 beta = 2 beta - 3 beta
        let beta = [1.0, 2.0, 3.0];
        let x = [0.3, -0.2, 0.7];
        let id = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let r = dual_advection_apply(&beta, &[[0.0; 3]; 3], &x, &id, 3);
        let bxv = |p: &Vec3| vecops::cross(&beta, p);
        let j = fd_jacobian(&bxv, &x, 3);
        let curl = crate::basis::curl_eval(&j, 3);
        for i in 0..3 {
            assert!((r[i] - (curl[i] - 3.0 * beta[i])).abs() < 1e-8);
            assert!((r[i] + beta[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn lie_plus_dual_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for dim in [2, 3] {
            for _ in 0..50 {
                let mut r = || rng.random_range(-1.0..1.0);
                let mut beta = [r(), r(), r()];
                let mut v = [r(), r(), r()];
                let mut gb = [[r(), r(), r()], [r(), r(), r()], [r(), r(), r()]];
                let mut gv = [[r(), r(), r()], [r(), r(), r()], [r(), r(), r()]];
                if dim == 2 {
                    beta[2] = 0.0;
                    v[2] = 0.0;
                    for i in 0..3 {
                        gb[2][i] = 0.0;
                        gb[i][2] = 0.0;
                        gv[2][i] = 0.0;
                        gv[i][2] = 0.0;
                    }
                }
                let lhs = vecops::add(
                    &lie_advection_apply(&beta, &gb, &v, &gv, dim),
                    &dual_advection_apply(&beta, &gb, &v, &gv, dim),
                );
                let div: f64 = (0..dim).map(|i| gb[i][i]).sum();
                for i in 0..dim {
                    let mut rhs = -div * v[i];
                    for j in 0..dim {
                        rhs += (gb[i][j] + gb[j][i]) * v[j];
                    }
                    assert!((lhs[i] - rhs).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn friedrichs_examples() {
        assert!(friedrichs_min_eig(&[[0.0; 3]; 3], 0.0, 3).abs() < 1e-15);
        // rotating field beta = (y - 1/2, 1/2 - x)
        let g = [[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0; 3]];
        assert!(friedrichs_min_eig(&g, 0.0, 2).abs() < 1e-15);
        assert!((friedrichs_min_eig(&[[0.0; 3]; 3], 1.0, 2) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dirichlet_boundary_data() {
        let beta = constant_vector([1.0, 2.0, 3.0]);
        let u = constant_vector([1.0, 1.0, 1.0]);
        let g = boundary_from_dirichlet(3, beta, u);
        // inflow face x = 0
        let v = g(&[0.0, 0.5, 0.5], &[-1.0, 0.0, 0.0]);
        let e = vecops::add(&vecops::cross(&[-1.0, 0.0, 0.0], &[1.0, 1.0, 1.0]), &[1.0, 0.0, 0.0]);
        assert_eq!(v, e);
        // outflow face z = 1 carries only the tangential part
        let v = g(&[0.5, 0.5, 1.0], &[0.0, 0.0, 1.0]);
        assert_eq!(v, vecops::cross(&[0.0, 0.0, 1.0], &[1.0, 1.0, 1.0]));
    }
}
