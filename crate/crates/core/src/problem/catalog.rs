//! The five compiled-in experiments.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{
    boundary_from_dirichlet, constant_scalar, constant_vector, zero_matrix, MatrixFn, ProblemSpec, SlitConstraint,
    VectorFn,
};
use crate::error::{HdgError, Result};
use crate::mesh::{build_unit_cube_mesh, build_unit_square_mesh, DiagonalPattern, Mesh};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeshFamily {
    UnitSquare,
    UnitCube,
}

#[derive(Clone, Debug)]
pub struct Experiment {
    pub id: u32,
    pub name: &'static str,
    pub dim: usize,
    pub mesh: MeshFamily,
    pub ks: Vec<usize>,
    pub epsilons: Vec<f64>,
    pub levels: Vec<usize>,
    pub has_exact: bool,
}

impl Experiment {
    pub fn problem(&self, epsilon: f64) -> Result<ProblemSpec> {
        experiment_problem(self.id, epsilon)
    }

    pub fn build_mesh(&self, n: usize, pattern: DiagonalPattern) -> Result<Mesh> {
        if self.id == 3 && !n.is_multiple_of(2) {
            return Err(HdgError::InvalidArgument(format!(
                "the slit of experiment 3 needs an even number of subdivisions, got {n}"
            )));
        }
        match self.mesh {
            MeshFamily::UnitSquare => build_unit_square_mesh(n, pattern),
            MeshFamily::UnitCube => build_unit_cube_mesh(n),
        }
    }
}

pub fn experiment_catalog(id: u32) -> Result<Experiment> {
    let all = vec![1.0, 1e-3, 1e-9];
    let layers = vec![1e-3, 1e-9];
    let e = match id {
        1 => Experiment {
            id,
            name: "3d_smooth",
            dim: 3,
            mesh: MeshFamily::UnitCube,
            ks: vec![0, 1],
            epsilons: all,
            levels: vec![1, 2, 4, 8],
            has_exact: true,
        },
        2 => Experiment {
            id,
            name: "2d_smooth",
            dim: 2,
            mesh: MeshFamily::UnitSquare,
            ks: vec![0, 1, 2],
            epsilons: all,
            levels: vec![2, 4, 8, 16, 32, 64],
            has_exact: true,
        },
        3 => Experiment {
            id,
            name: "rotating_flow",
            dim: 2,
            mesh: MeshFamily::UnitSquare,
            ks: vec![0, 1, 2],
            epsilons: vec![1e-9],
            levels: vec![16],
            has_exact: false,
        },
        4 => Experiment {
            id,
            name: "interior_layer",
            dim: 2,
            mesh: MeshFamily::UnitSquare,
            ks: vec![1],
            epsilons: layers,
            levels: vec![16],
            has_exact: false,
        },
        5 => Experiment {
            id,
            name: "boundary_layer",
            dim: 2,
            mesh: MeshFamily::UnitSquare,
            ks: vec![1],
            epsilons: layers,
            levels: vec![16],
            has_exact: false,
        },
        _ => return Err(HdgError::InvalidArgument(format!("unknown experiment id {id} (expected 1..5)"))),
    };
    Ok(e)
}

pub fn experiment_problem(id: u32, epsilon: f64) -> Result<ProblemSpec> {
    let spec = match id {
        1 => {
            let beta = constant_vector([1.0, 2.0, 3.0]);
            let u: VectorFn = Arc::new(|x| [x[1].sin(), x[2].sin(), x[0].sin()]);
            ProblemSpec {
                dim: 3,
                epsilon,
                g: boundary_from_dirichlet(3, beta.clone(), u.clone()),
                beta,
                grad_beta: zero_matrix(),
                gamma: constant_scalar(0.0),
                f: Arc::new(move |x| {
                    [
                        epsilon * x[1].sin() + 2.0 * x[1].cos(),
                        epsilon * x[2].sin() + 3.0 * x[2].cos(),
                        epsilon * x[0].sin() + x[0].cos(),
                    ]
                }),
                exact_u: Some(u),
                exact_curl_u: Some(Arc::new(|x| [-x[2].cos(), -x[0].cos(), -x[1].cos()])),
                slit: None,
                description: "experiment 1: smooth 3D solution".into(),
            }
        }
        2 => {
            let beta = constant_vector([1.0, 2.0, 0.0]);
            let u: VectorFn = Arc::new(|x| [x[1].sin(), x[0].sin(), 0.0]);
            ProblemSpec {
                dim: 2,
                epsilon,
                g: boundary_from_dirichlet(2, beta.clone(), u.clone()),
                beta,
                grad_beta: zero_matrix(),
                gamma: constant_scalar(0.0),
                f: Arc::new(move |x| {
                    [
                        epsilon * x[1].sin() + 2.0 * x[1].cos(),
                        epsilon * x[0].sin() + x[0].cos(),
                        0.0,
                    ]
                }),
                exact_u: Some(u),
                exact_curl_u: Some(Arc::new(|x| [x[0].cos() - x[1].cos(), 0.0, 0.0])),
                slit: None,
                description: "experiment 2: smooth 2D solution".into(),
            }
        }
        3 => {
            let beta: VectorFn = Arc::new(|x| [x[1] - 0.5, 0.5 - x[0], 0.0]);
            let grad_beta: MatrixFn = Arc::new(|_| [[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0; 3]]);
            let value: VectorFn = Arc::new(|x| {
                let s = (2.0 * std::f64::consts::PI * x[1]).sin().powi(2);
                [s, s, 0.0]
            });
            ProblemSpec {
                dim: 2,
                epsilon,
                beta,
                grad_beta,
                gamma: constant_scalar(0.0),
                f: constant_vector([0.0; 3]),
                g: super::zero_boundary(),
                exact_u: None,
                exact_curl_u: None,
                slit: Some(SlitConstraint {
                    from: [0.5, 0.0, 0.0],
                    to: [0.5, 0.5, 0.0],
                    value,
                }),
                description: "experiment 3: rotating flow with prescribed slit".into(),
            }
        }
        4 => {
            let s3 = 3f64.sqrt();
            let beta = constant_vector([0.5, 0.5 * s3, 0.0]);
            let tol = 1e-12;
            let u: VectorFn = Arc::new(move |x| {
                if x[1] <= tol || (x[0] <= tol && x[1] <= 0.2) {
                    [1.0, 1.0, 0.0]
                } else {
                    [0.0; 3]
                }
            });
            ProblemSpec {
                dim: 2,
                epsilon,
                g: boundary_from_dirichlet(2, beta.clone(), u),
                beta,
                grad_beta: zero_matrix(),
                gamma: constant_scalar(0.0),
                f: constant_vector([0.0; 3]),
                exact_u: None,
                exact_curl_u: None,
                slit: None,
                description: "experiment 4: interior layer".into(),
            }
        }
        5 => ProblemSpec {
            dim: 2,
            epsilon,
            beta: constant_vector([1.0, 2.0, 0.0]),
            grad_beta: zero_matrix(),
            gamma: constant_scalar(0.0),
            f: constant_vector([1.0, 1.0, 0.0]),
            g: super::zero_boundary(),
            exact_u: None,
            exact_curl_u: None,
            slit: None,
            description: "experiment 5: boundary layer".into(),
        },
        _ => return Err(HdgError::InvalidArgument(format!("unknown experiment id {id} (expected 1..5)"))),
    };
    spec.validate()?;
    Ok(spec)
}
