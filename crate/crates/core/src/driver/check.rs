//! A quick invariant suite on tiny meshes.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::assembly::{energy_identity, monolithic_solve, solve, Discretization, FieldSolution, QuadratureSettings};
use crate::error::Result;
use crate::linsolve::SolveOptions;
use crate::mesh::{build_unit_cube_mesh, build_unit_square_mesh, Mesh};
use crate::norms::energy_error;
use crate::postprocess::{curl_identity_residual, gradient_moment_residual, postprocess_curlfit, postprocess_star_2d};
use crate::problem::{
    audit_stabilization, constant_scalar, constant_vector, experiment_catalog, experiment_problem, zero_boundary,
    zero_matrix, Poly, ProblemSpec, VectorPoly,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    /// a failure that is understood and documented
    Known,
}

#[derive(Clone, Debug)]
pub struct CheckOutcome {
    pub name: String,
    pub status: CheckStatus,
    pub detail: String,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.status {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Known => "KNOWN",
        };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

fn outcome(name: impl Into<String>, ok: bool, detail: String) -> CheckOutcome {
    CheckOutcome {
        name: name.into(),
        status: if ok { CheckStatus::Pass } else { CheckStatus::Fail },
        detail,
    }
}

fn mesh(dim: usize, n: usize) -> Result<Arc<Mesh>> {
    Ok(Arc::new(if dim == 2 {
        build_unit_square_mesh(n, Default::default())?
    } else {
        build_unit_cube_mesh(n)?
    }))
}

fn solve_on(dim: usize, n: usize, k: usize, spec: ProblemSpec) -> Result<FieldSolution> {
    let disc = Arc::new(Discretization::new(mesh(dim, n)?, spec, k, QuadratureSettings::default())?);
    Ok(solve(disc, &SolveOptions::default())?.solution)
}

/// Random polynomial vector field of total degree at most `k`.
pub fn random_polynomial(rng: &mut impl Rng, dim: usize, k: usize) -> VectorPoly {
    let mut comps = [Poly::constant(0.0), Poly::constant(0.0), Poly::constant(0.0)];
    for c in comps.iter_mut().take(dim) {
        let mut terms = Vec::new();
        for px in 0..=k as u32 {
            for py in 0..=(k as u32 - px) {
                let zmax = if dim == 3 { k as u32 - px - py } else { 0 };
                for pz in 0..=zmax {
                    terms.push((rng.random_range(-1.0..1.0), [px, py, pz]));
                }
            }
        }
        *c = Poly::new(terms);
    }
    VectorPoly::new(comps)
}

fn condensed_vs_monolithic() -> Result<CheckOutcome> {
    let mut worst: f64 = 0.0;
    for (dim, n, id) in [(2, 2, 2), (3, 1, 1)] {
        for k in [0, 1] {
            let disc = Arc::new(Discretization::new(
                mesh(dim, n)?,
                experiment_problem(id, 1e-3)?,
                k,
                QuadratureSettings::default(),
            )?);
            let mono = monolithic_solve(&disc)?;
            let cond = solve(disc.clone(), &SolveOptions::default())?.solution;
            for (a, b) in mono.lambda.iter().zip(&cond.lambda) {
                worst = worst.max((a - b).abs());
            }
            for e in 0..disc.mesh.num_elements() {
                let x = cond.w[e].iter().chain(&cond.u[e]);
                for (a, b) in mono.interior[e].iter().zip(x) {
                    worst = worst.max((a - b).abs());
                }
            }
        }
    }
    Ok(outcome("condensed = monolithic", worst < 1e-10, format!("max difference {worst:.2e}")))
}

fn patch_tests(seed: u64) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for (dim, n, ks) in [(2, 2, vec![0, 1, 2]), (3, 1, vec![0, 1])] {
        for k in ks {
            let u = random_polynomial(&mut rng, dim, k);
            let mut beta = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), 0.0];
            if dim == 3 {
                beta[2] = rng.random_range(-1.0..1.0);
            }
            let eps = if rng.random_bool(0.5) { 1.0 } else { 1e-3 };
            let spec = ProblemSpec::manufactured(dim, eps, constant_vector(beta), zero_matrix(), constant_scalar(1.0), u, "patch");
            worst = worst.max(energy_error(&solve_on(dim, n, k, spec)?)?);
        }
    }
    Ok(outcome("patch tests", worst < 1e-9, format!("largest energy error {worst:.2e}")))
}

fn energy_balance() -> Result<CheckOutcome> {
    let mut worst: f64 = 0.0;
    for (dim, n, k) in [(2, 3, 1), (3, 1, 1)] {
        let mut spec = experiment_problem(if dim == 2 { 5 } else { 1 }, 1e-2)?;
        spec.g = zero_boundary();
        spec.f = constant_vector(if dim == 2 { [1.0, -0.5, 0.0] } else { [1.0, -0.5, 0.25] });
        if dim == 3 {
            spec.beta = constant_vector([1.0, 0.3, -0.2]);
            spec.grad_beta = zero_matrix();
        }
        worst = worst.max(energy_identity(&solve_on(dim, n, k, spec)?).residual);
    }
    Ok(outcome("energy identity", worst < 1e-8, format!("largest relative residual {worst:.2e}")))
}

fn postprocessing() -> Result<CheckOutcome> {
    let sol = solve_on(2, 4, 1, experiment_problem(2, 1e-3)?)?;
    let star = postprocess_star_2d(&sol)?;
    let fit = postprocess_curlfit(&sol)?;
    let r = [
        curl_identity_residual(&star, &sol)?,
        curl_identity_residual(&fit, &sol)?,
        gradient_moment_residual(&fit, &sol)?,
    ];
    let ok = r[0] < 1e-10 && r[1] < 1e-10 && r[2] < 1e-11;
    Ok(outcome(
        "postprocessing identities",
        ok,
        format!("star curl {:.1e}, curl-fit curl {:.1e}, gradient moments {:.1e}", r[0], r[1], r[2]),
    ))
}

fn stabilization_audits() -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    for id in 1..=5 {
        let exp = experiment_catalog(id)?;
        let n = if exp.dim == 3 { 2 } else { 8 };
        let m = exp.build_mesh(n, Default::default())?;
        for eps in [1.0, 1e-3, 1e-9] {
            let spec = exp.problem(eps)?;
            let disc = Discretization::new(Arc::new(m.clone()), spec.clone(), 1, QuadratureSettings::default())?;
            let rep = audit_stabilization(&m, &spec, &disc.tau, &disc.space.facet_rule, 0.25, 0.5);
            let mut o = outcome(
                format!("stabilization audit exp{id} eps={eps:e}"),
                rep.passed(),
                format!("{} violations at {} points", rep.violations, rep.checked_points),
            );
            if o.status == CheckStatus::Fail && id == 3 {
                // the rotating field vanishes at facet endpoints on the axes of rotation
                o.status = CheckStatus::Known;
            }
            out.push(o);
        }
    }
    Ok(out)
}

/// Runs the whole suite; errors inside a check are reported as failures.
pub fn run_checks(seed: u64) -> Vec<CheckOutcome> {
    let wrap = |name: &str, r: Result<CheckOutcome>| {
        r.unwrap_or_else(|e| outcome(name, false, format!("error: {e}")))
    };
    let mut out = vec![
        wrap("condensed = monolithic", condensed_vs_monolithic()),
        wrap("patch tests", patch_tests(seed)),
        wrap("energy identity", energy_balance()),
        wrap("postprocessing identities", postprocessing()),
    ];
    match stabilization_audits() {
        Ok(v) => out.extend(v),
        Err(e) => out.push(outcome("stabilization audit", false, format!("error: {e}"))),
    }
    out
}
