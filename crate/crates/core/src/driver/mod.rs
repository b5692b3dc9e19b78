//! Configuration and orchestration: convergence tables, field dumps and the
//! invariant check suite behind the command-line interface.

mod check;
mod convergence;
mod dump;

pub use check::{random_polynomial, run_checks, CheckOutcome, CheckStatus};
pub use convergence::{convergence_report, format_table, run_convergence, write_report_csv, ConvergenceOutput};
pub use dump::{run_field_dump, DumpOutput};

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::assembly::{solve, Discretization, FieldSolution, QuadratureSettings};
use crate::error::{HdgError, Result};
use crate::linsolve::SolveOptions;
use crate::mesh::{build_unit_cube_mesh, build_unit_square_mesh, DiagonalPattern, Mesh};
use crate::postprocess::{postprocess_curlfit, postprocess_star_2d, PostField};
use crate::problem::{constant_scalar, constant_vector, experiment_catalog, zero_matrix, Poly, ProblemSpec, VectorPoly};

/// Largest 3D refinement level accepted unless `allow_large_3d` is set.
pub const MAX_3D_LEVEL: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PostprocessToggles {
    pub star2d: bool,
    pub curlfit: bool,
}

impl Default for PostprocessToggles {
    fn default() -> Self {
        Self {
            star2d: true,
            curlfit: true,
        }
    }
}

/// A manufactured problem given inline: constant advection and reaction,
/// polynomial exact solution. Each component of `u` is a list of
/// `[coefficient, px, py, pz]` monomials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineProblem {
    pub dim: usize,
    #[serde(default)]
    pub beta: [f64; 3],
    #[serde(default = "one")]
    pub gamma: f64,
    pub u: [Vec<[f64; 4]>; 3],
}

fn one() -> f64 {
    1.0
}

impl InlineProblem {
    fn spec(&self, epsilon: f64) -> Result<ProblemSpec> {
        let poly = |terms: &Vec<[f64; 4]>| -> Result<Poly> {
            terms
                .iter()
                .map(|t| {
                    let p = [t[1], t[2], t[3]];
                    if p.iter().any(|v| *v < 0.0 || v.fract() != 0.0) {
                        return Err(HdgError::InvalidArgument(format!("bad monomial powers {p:?}")));
                    }
                    Ok((t[0], [p[0] as u32, p[1] as u32, p[2] as u32]))
                })
                .collect::<Result<Vec<_>>>()
                .map(Poly::new)
        };
        let mut beta = self.beta;
        let mut comps = [poly(&self.u[0])?, poly(&self.u[1])?, poly(&self.u[2])?];
        if self.dim == 2 {
            beta[2] = 0.0;
            comps[2] = Poly::constant(0.0);
        }
        Ok(ProblemSpec::manufactured(
            self.dim,
            epsilon,
            constant_vector(beta),
            zero_matrix(),
            constant_scalar(self.gamma),
            VectorPoly::new(comps),
            "inline manufactured problem",
        ))
    }
}

/// A scalar or a list in the config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    pub fn values(&self) -> Vec<f64> {
        match self {
            OneOrMany::One(v) => vec![*v],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

/// Run configuration, read from JSON. Every key is optional.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: u32,
    /// replaces the catalog problem when present
    pub problem: Option<InlineProblem>,
    pub k: usize,
    #[serde(alias = "eps")]
    pub epsilon: OneOrMany,
    pub levels: Vec<usize>,
    pub solver: SolveOptions,
    pub postprocess: PostprocessToggles,
    pub output_dir: PathBuf,
    pub quadrature: QuadratureSettings,
    pub diagonal: DiagonalPattern,
    /// seed of the randomized parts of the check suite
    pub seed: u64,
    /// lift the 3D level cap
    pub allow_large_3d: bool,
    /// samples per direction of the dump lattice; 129 in 2D and 33 in 3D by default
    pub lattice: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            experiment: 2,
            problem: None,
            k: 1,
            epsilon: OneOrMany::One(1.0),
            levels: vec![2, 4, 8, 16],
            solver: SolveOptions::default(),
            postprocess: PostprocessToggles::default(),
            output_dir: PathBuf::from("out"),
            quadrature: QuadratureSettings::default(),
            diagonal: DiagonalPattern::default(),
            seed: 0,
            allow_large_3d: false,
            lattice: None,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn epsilons(&self) -> Vec<f64> {
        self.epsilon.values()
    }

    pub fn dim(&self) -> Result<usize> {
        match &self.problem {
            Some(p) => Ok(p.dim),
            None => Ok(experiment_catalog(self.experiment)?.dim),
        }
    }

    pub fn has_exact(&self) -> Result<bool> {
        match &self.problem {
            Some(_) => Ok(true),
            None => Ok(experiment_catalog(self.experiment)?.has_exact),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HdgError::InvalidArgument(m));
        if self.k > 2 {
            return bad(format!("k must be 0, 1 or 2, got {}", self.k));
        }
        let eps = self.epsilons();
        if eps.is_empty() || eps.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            return bad(format!("epsilon values must be positive, got {eps:?}"));
        }
        if self.levels.is_empty() || self.levels.contains(&0) {
            return bad("levels must be a nonempty list of positive subdivisions".into());
        }
        if self.levels.windows(2).any(|w| w[0] >= w[1]) {
            return bad(format!("levels must be strictly increasing, got {:?}", self.levels));
        }
        if let Some(p) = &self.problem {
            if !(2..=3).contains(&p.dim) {
                return bad(format!("inline problem dimension must be 2 or 3, got {}", p.dim));
            }
        }
        let dim = self.dim()?;
        let top = *self.levels.last().unwrap();
        if dim == 3 && top > MAX_3D_LEVEL && !self.allow_large_3d {
            return bad(format!(
                "3D level {top} exceeds the cap {MAX_3D_LEVEL}; set allow_large_3d to override"
            ));
        }
        if matches!(self.lattice, Some(n) if n < 2) {
            return bad("lattice needs at least 2 samples per direction".into());
        }
        Ok(())
    }

    pub fn problem_spec(&self, epsilon: f64) -> Result<ProblemSpec> {
        match &self.problem {
            Some(p) => p.spec(epsilon),
            None => experiment_catalog(self.experiment)?.problem(epsilon),
        }
    }

    pub fn build_mesh(&self, n: usize) -> Result<Mesh> {
        match &self.problem {
            Some(p) if p.dim == 2 => build_unit_square_mesh(n, self.diagonal),
            Some(_) => build_unit_cube_mesh(n),
            None => experiment_catalog(self.experiment)?.build_mesh(n, self.diagonal),
        }
    }

    /// Name prefix of the output files, e.g. `exp2_k1_eps1e-3`.
    pub fn stem(&self, epsilon: f64) -> String {
        let exp = match &self.problem {
            Some(_) => "inline".to_string(),
            None => format!("exp{}", self.experiment),
        };
        format!("{exp}_k{}_eps{epsilon:e}", self.k)
    }
}

/// One solved refinement level with its optional postprocessed fields.
pub struct LevelSolution {
    pub n: usize,
    pub h: f64,
    pub dofs: usize,
    pub solution: FieldSolution,
    pub star: Option<PostField>,
    pub curlfit: Option<PostField>,
}

pub fn solve_level(cfg: &RunConfig, epsilon: f64, n: usize) -> Result<LevelSolution> {
    let mesh = Arc::new(cfg.build_mesh(n)?);
    let spec = cfg.problem_spec(epsilon)?;
    let h = mesh.mesh_size();
    let disc = Arc::new(Discretization::new(mesh, spec, cfg.k, cfg.quadrature)?);
    let solved = solve(disc.clone(), &cfg.solver)?;
    let sol = solved.solution;
    let star = if cfg.postprocess.star2d && disc.layout.dim == 2 {
        Some(postprocess_star_2d(&sol)?)
    } else {
        None
    };
    let curlfit = if cfg.postprocess.curlfit {
        Some(postprocess_curlfit(&sol)?)
    } else {
        None
    };
    log::info!(
        "n={n}: {} trace unknowns, residual {:.2e}",
        solved.system_size,
        solved.report.residual
    );
    Ok(LevelSolution {
        n,
        h,
        dofs: solved.system_size,
        solution: sol,
        star,
        curlfit,
    })
}
