//! Hybridizable discontinuous Galerkin (HDG) discretization of the magnetic
//! advection-diffusion problem
//!
//! ```text
//! curl(eps curl u) - beta x curl u + grad(beta . u) + gamma u = f   in Omega
//! n x u + chi_in (u . n) n = g                                       on Gamma
//! ```
//!
//! in mixed form with `w = eps curl u`, on simplicial meshes of the unit
//! square and unit cube. The only globally coupled unknown is the facet trace
//! of `u`; element unknowns are eliminated by static condensation and
//! recovered afterwards. Two elementwise postprocessing schemes produce
//! degree `k+1` fields with improved broken H(curl) accuracy.
//!
//! Module map:
//! - [`mesh`]: uniform simplicial meshes with facet topology
//! - [`basis`]: quadrature, orthonormal polynomial bases, curl operators
//! - [`problem`]: coefficients, stabilization, the experiment catalog
//! - [`assembly`]: local blocks, condensation, trace system, field recovery
//! - [`linsolve`]: dense LU, sparse trace-system solves
//! - [`postprocess`]: the 2D edge-moment scheme and the curl-fit scheme
//! - [`norms`]: energy, L2 and broken H(curl) errors, EOC
//! - [`driver`]: run configuration, convergence tables, field dumps

// index loops mirror the tensor notation of the local matrices
#![allow(clippy::needless_range_loop)]

pub mod assembly;
pub mod basis;
pub mod driver;
pub mod error;
pub mod linsolve;
pub mod mesh;
pub mod norms;
pub mod postprocess;
pub mod problem;
pub mod vecops;

pub use error::{HdgError, Result};
