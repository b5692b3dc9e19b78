//! HDG assembly: element blocks, static condensation onto the facet trace,
//! the global trace system, and recovery of the element fields.
//!
//! Local unknown ordering on an element: `w` (curl components times scalar
//! basis), then `u` (dim components times scalar basis); trace unknowns are
//! ordered by local facet, then Cartesian component, then facet basis
//! function. A global trace dof is `facet * dim * nf + component * nf + m`.

mod condense;
mod energy;
mod global;
mod local;
mod monolithic;
mod recover;

pub use condense::{condense, CondensedElement};
pub use energy::{energy_identity, EnergyIdentity};
pub use global::{assemble_global, TraceSystem};
pub use local::{assemble_local, LocalBlocks};
pub use monolithic::{monolithic_solve, MonolithicSolution};
pub use recover::{recover_fields, FieldSolution};

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{curl_components, ReferenceSpace};
use crate::error::{HdgError, Result};
use crate::linsolve::{sparse_solve, SolveOptions, SolveReport};
use crate::mesh::Mesh;
use crate::problem::{ProblemSpec, StabilizationParams};

/// Exactness degrees of the quadrature rules; `None` selects the defaults
/// `2k + 4` (elements), `2k + 3` (facets) and `2k + 6` (error norms).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSettings {
    pub element: Option<usize>,
    pub facet: Option<usize>,
    pub norms: Option<usize>,
}

impl QuadratureSettings {
    pub fn element_degree(&self, k: usize) -> usize {
        self.element.unwrap_or(2 * k + 4)
    }

    pub fn facet_degree(&self, k: usize) -> usize {
        self.facet.unwrap_or(2 * k + 3)
    }

    pub fn norms_degree(&self, k: usize) -> usize {
        self.norms.unwrap_or(2 * k + 6)
    }
}

/// Sizes of the local spaces.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LocalLayout {
    pub dim: usize,
    /// components of `w`
    pub cw: usize,
    /// scalar element basis size
    pub nb: usize,
    /// scalar facet basis size
    pub nf: usize,
}

impl LocalLayout {
    pub fn new(dim: usize, nb: usize, nf: usize) -> Self {
        Self {
            dim,
            cw: curl_components(dim),
            nb,
            nf,
        }
    }

    pub fn nw(&self) -> usize {
        self.cw * self.nb
    }

    pub fn nu(&self) -> usize {
        self.dim * self.nb
    }

    pub fn interior(&self) -> usize {
        self.nw() + self.nu()
    }

    pub fn facets(&self) -> usize {
        self.dim + 1
    }

    pub fn per_facet(&self) -> usize {
        self.dim * self.nf
    }

    pub fn trace(&self) -> usize {
        self.facets() * self.per_facet()
    }

    pub fn w_index(&self, a: usize, i: usize) -> usize {
        a * self.nb + i
    }

    pub fn u_index(&self, b: usize, i: usize) -> usize {
        self.nw() + b * self.nb + i
    }

    pub fn trace_index(&self, local: usize, c: usize, m: usize) -> usize {
        local * self.per_facet() + c * self.nf + m
    }

    pub fn global_trace(&self, facet: usize, c: usize, m: usize) -> usize {
        facet * self.per_facet() + c * self.nf + m
    }
}

/// Everything needed to assemble and solve one discrete problem.
#[derive(Clone, Debug)]
pub struct Discretization {
    pub mesh: Arc<Mesh>,
    pub spec: ProblemSpec,
    pub k: usize,
    pub space: ReferenceSpace,
    pub tau: StabilizationParams,
    pub layout: LocalLayout,
    pub quadrature: QuadratureSettings,
}

impl Discretization {
    /// Uses the default stabilization on every facet side.
    pub fn new(mesh: Arc<Mesh>, spec: ProblemSpec, k: usize, quadrature: QuadratureSettings) -> Result<Self> {
        spec.validate()?;
        if spec.dim != mesh.dim() {
            return Err(HdgError::InvalidArgument(format!(
                "problem is {}D but mesh is {}D",
                spec.dim,
                mesh.dim()
            )));
        }
        let dim = mesh.dim();
        let space = ReferenceSpace::new(dim, k, quadrature.element_degree(k), quadrature.facet_degree(k))?;
        let tau = StabilizationParams::new(&mesh, &spec, &space.facet_rule);
        let layout = LocalLayout::new(dim, space.nb(), space.nf());
        Ok(Self {
            mesh,
            spec,
            k,
            space,
            tau,
            layout,
            quadrature,
        })
    }

    pub fn with_stabilization(mut self, tau: StabilizationParams) -> Self {
        self.tau = tau;
        self
    }

    pub fn num_trace_dofs(&self) -> usize {
        self.mesh.num_facets() * self.layout.per_facet()
    }
}

/// Result of the condensed pipeline.
pub struct Solved {
    pub solution: FieldSolution,
    pub report: SolveReport,
    pub system_size: usize,
}

/// Local assembly and condensation of every element, in parallel.
pub fn condense_all(disc: &Discretization) -> Result<Vec<CondensedElement>> {
    (0..disc.mesh.num_elements())
        .into_par_iter()
        .map(|e| assemble_local(disc, e).and_then(|b| condense(&b)))
        .collect()
}

/// Assembles, condenses, solves the trace system and recovers all fields.
pub fn solve(disc: Arc<Discretization>, options: &SolveOptions) -> Result<Solved> {
    let condensed = condense_all(&disc)?;
    let system = assemble_global(&disc, &condensed)?;
    let (x, report) = sparse_solve(&system.matrix, &system.rhs, options)?;
    let lambda = system.expand(&x);
    let solution = recover_fields(disc, &condensed, lambda)?;
    Ok(Solved {
        solution,
        report,
        system_size: system.matrix.nrows(),
    })
}
