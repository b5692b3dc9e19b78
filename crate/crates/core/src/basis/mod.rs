//! Polynomial spaces on simplices: quadrature, orthonormal scalar bases, their
//! vector tensorizations, curl operators and element-level tabulations.
//!
//! Conventions shared by the whole crate:
//! - a vector basis function `c * nb + i` is `phi_i e_c`;
//! - in 2D the curl of a vector field is the scalar `d1 v2 - d2 v1`, stored in
//!   slot 0 of a [`Vec3`]; the curl of a scalar `r` is `R grad r`.

mod curl_range;
mod element;
pub mod quadrature;
mod scalar;

pub use curl_range::{build_curl_range_basis, CurlRangeBasis};
pub use element::{ElementTab, FacetTab, ReferenceSpace};
pub use quadrature::{quadrature_rule, QuadratureRule};
pub use scalar::{eval_scalar_basis, poly_dim, reference_constant, ScalarBasis};

use crate::vecops::{Mat3, Vec3};

/// The quarter-turn `R = [[0, 1], [-1, 0]]` of the plane.
#[derive(Clone, Copy, Debug, Default)]
pub struct RotationR;

impl RotationR {
    pub const MATRIX: [[f64; 2]; 2] = [[0.0, 1.0], [-1.0, 0.0]];

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [v[1], -v[0]]
    }

    pub fn apply3(&self, v: &Vec3) -> Vec3 {
        [v[1], -v[0], 0.0]
    }
}

/// Curl of a vector field from its Jacobian `m[i][j] = d_j v_i`.
pub fn curl_eval(jac: &Mat3, dim: usize) -> Vec3 {
    if dim == 2 {
        [jac[1][0] - jac[0][1], 0.0, 0.0]
    } else {
        [jac[2][1] - jac[1][2], jac[0][2] - jac[2][0], jac[1][0] - jac[0][1]]
    }
}

/// Number of components of the curl (and of `w`): 3 in 3D, 1 in 2D.
pub fn curl_components(dim: usize) -> usize {
    if dim == 2 {
        1
    } else {
        3
    }
}

/// Curl of the vector basis function `phi e_c` given `grad phi`.
pub fn curl_of_component(grad: &Vec3, c: usize, dim: usize) -> Vec3 {
    if dim == 2 {
        match c {
            0 => [-grad[1], 0.0, 0.0],
            _ => [grad[0], 0.0, 0.0],
        }
    } else {
        let mut e = [0.0; 3];
        e[c] = 1.0;
        crate::vecops::cross(grad, &e)
    }
}

/// Curl of the `w`-space basis function `phi e_a`: `grad phi x e_a` in 3D,
/// `R grad phi` in 2D.
pub fn curl_of_w_component(grad: &Vec3, a: usize, dim: usize) -> Vec3 {
    if dim == 2 {
        [grad[1], -grad[0], 0.0]
    } else {
        let mut e = [0.0; 3];
        e[a] = 1.0;
        crate::vecops::cross(grad, &e)
    }
}

/// `n x (r e_a)` for a unit `r`: `n x e_a` in 3D, `R n` in 2D.
pub fn n_cross_w_component(n: &Vec3, a: usize, dim: usize) -> Vec3 {
    if dim == 2 {
        [n[1], -n[0], 0.0]
    } else {
        let mut e = [0.0; 3];
        e[a] = 1.0;
        crate::vecops::cross(n, &e)
    }
}

/// Componentwise tensorization of a scalar basis.
#[derive(Clone, Debug)]
pub struct VectorBasis {
    pub scalar: ScalarBasis,
    pub components: usize,
}

impl VectorBasis {
    pub fn new(scalar: ScalarBasis, components: usize) -> Self {
        Self { scalar, components }
    }

    pub fn len(&self) -> usize {
        self.components * self.scalar.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, component: usize, i: usize) -> usize {
        component * self.scalar.len() + i
    }

    /// Curls of every vector basis function from scalar gradients at one point.
    pub fn curls(&self, grads: &[Vec3], dim: usize) -> Vec<Vec3> {
        let mut out = Vec::with_capacity(self.len());
        for c in 0..self.components {
            for g in grads {
                out.push(curl_of_component(g, c, dim));
            }
        }
        out
    }
}
