//! Static condensation of the element unknowns.

use nalgebra::{DMatrix, DVector};

use super::local::LocalBlocks;
use crate::error::{HdgError, Result};
use crate::linsolve::DenseLu;

/// Pivot threshold for the interior block, relative to the row maximum.
const INTERIOR_PIVOT_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct CondensedElement {
    pub element: usize,
    pub facets: Vec<usize>,
    /// `D - C A^{-1} B`
    pub schur: DMatrix<f64>,
    /// `G - C A^{-1} F`
    pub rhs: DVector<f64>,
    /// `A^{-1} F`, the element fields for zero trace
    pub interior_f: DVector<f64>,
    /// `A^{-1} B`, the element response to the trace
    pub interior_b: DMatrix<f64>,
}

impl CondensedElement {
    /// Element unknowns `(w, u)` for local trace values `lam`.
    pub fn recover(&self, lam: &DVector<f64>) -> DVector<f64> {
        &self.interior_f - &self.interior_b * lam
    }
}

pub fn condense(blocks: &LocalBlocks) -> Result<CondensedElement> {
    let lu = DenseLu::factor_with_tolerance(&blocks.a, INTERIOR_PIVOT_TOLERANCE).map_err(|e| HdgError::Assembly {
        element: blocks.element,
        reason: format!("interior block: {e}"),
    })?;
    let ratio = lu.pivot_ratio();
    if ratio > 1e12 {
        log::warn!("element {}: interior block pivot ratio {ratio:.2e}", blocks.element);
    }
    let interior_b = lu.solve_matrix(&blocks.b);
    let interior_f = DVector::from_vec(lu.solve(blocks.f.as_slice()));
    let schur = &blocks.d - &blocks.c * &interior_b;
    let rhs = &blocks.g - &blocks.c * &interior_f;
    Ok(CondensedElement {
        element: blocks.element,
        facets: blocks.facets.clone(),
        schur,
        rhs,
        interior_f,
        interior_b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble_local, Discretization, QuadratureSettings};
    use crate::mesh::build_unit_square_mesh;
    use crate::problem::experiment_problem;
    use std::sync::Arc;

    #[test]
    fn schur_matches_dense_inverse() {
        let mesh = build_unit_square_mesh(2, Default::default()).unwrap();
        let disc = Discretization::new(Arc::new(mesh), experiment_problem(2, 1e-3).unwrap(), 1, QuadratureSettings::default())
            .unwrap();
        let bl = assemble_local(&disc, 5).unwrap();
        let ce = condense(&bl).unwrap();
        let ainv = bl.a.clone().try_inverse().unwrap();
        let s = &bl.d - &bl.c * &ainv * &bl.b;
        assert!((&s - &ce.schur).amax() < 1e-12 * (1.0 + s.amax()));
    }

    #[test]
    fn zero_data_gives_zero_rhs() {
        let mesh = build_unit_square_mesh(2, Default::default()).unwrap();
        let mut spec = experiment_problem(5, 1.0).unwrap();
        spec.f = crate::problem::constant_vector([0.0; 3]);
        let disc = Discretization::new(Arc::new(mesh), spec, 1, QuadratureSettings::default()).unwrap();
        for e in 0..8 {
            let ce = condense(&assemble_local(&disc, e).unwrap()).unwrap();
            assert_eq!(ce.rhs.amax(), 0.0);
        }
    }
}
