//! Facet-side stabilization parameters and the audit of their requirements.

use super::ProblemSpec;
use crate::basis::QuadratureRule;
use crate::mesh::{FacetSide, Mesh};
use crate::vecops::{self, Vec3};

pub const TAU_N_FLOOR: f64 = 0.1;

/// `(tau_t, tau_n)` for every `(element, local facet)`.
#[derive(Clone, Debug)]
pub struct StabilizationParams {
    tau: Vec<[(f64, f64); 4]>,
    pub floor: f64,
}

impl StabilizationParams {
    /// The default parameters on every facet side.
    pub fn new(mesh: &Mesh, spec: &ProblemSpec, facet_rule: &QuadratureRule) -> Self {
        let nl = mesh.dim() + 1;
        let tau = (0..mesh.num_elements())
            .map(|e| {
                let mut t = [(0.0, 0.0); 4];
                for (l, tl) in t.iter_mut().enumerate().take(nl) {
                    *tl = default_stabilization(mesh, mesh.facet_side(e, l), spec, facet_rule);
                }
                t
            })
            .collect();
        Self {
            tau,
            floor: TAU_N_FLOOR,
        }
    }

    /// The same pair on every facet side.
    pub fn uniform(mesh: &Mesh, tau_t: f64, tau_n: f64) -> Self {
        Self {
            tau: vec![[(tau_t, tau_n); 4]; mesh.num_elements()],
            floor: TAU_N_FLOOR,
        }
    }

    pub fn get(&self, element: usize, local: usize) -> (f64, f64) {
        self.tau[element][local]
    }

    pub fn set(&mut self, element: usize, local: usize, value: (f64, f64)) {
        self.tau[element][local] = value;
    }
}

/// Physical quadrature points of facet `f`.
pub(crate) fn facet_points(mesh: &Mesh, f: usize, rule: &QuadratureRule) -> Vec<Vec3> {
    let fv = mesh.facet_vertices(f);
    rule.points
        .iter()
        .map(|p| {
            let mut x = fv[0];
            for j in 1..mesh.dim() {
                x = vecops::add(&x, &vecops::scale(p[j - 1], &vecops::sub(&fv[j], &fv[0])));
            }
            x
        })
        .collect()
}

/// `tau_t = max(sup beta.n, 0) + min(eps / h_F, 1)` and
/// `tau_n = max(max(sup beta.n, 0), floor)`, the sup taken over the facet
/// quadrature points with the side's outward normal.
pub fn default_stabilization(mesh: &Mesh, side: FacetSide, spec: &ProblemSpec, rule: &QuadratureRule) -> (f64, f64) {
    let f = mesh.element_facet(side.element, side.local);
    let n = mesh.outward_normal(side.element, side.local);
    let sup = facet_points(mesh, f, rule)
        .iter()
        .map(|x| vecops::dot(&(spec.beta)(x), &n))
        .fold(f64::NEG_INFINITY, f64::max);
    let plus = sup.max(0.0);
    let h = mesh.facet_diameter(f);
    (plus + (spec.epsilon / h).min(1.0), plus.max(TAU_N_FLOOR))
}

#[derive(Clone, Debug, Default)]
pub struct AuditReport {
    pub checked_points: usize,
    pub violations: usize,
    /// smallest slack over all points for each of the four requirements
    pub min_slack: [f64; 4],
    pub first_violation: Option<String>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Checks at every facet quadrature point, for every facet side:
/// `0 <= tau_t, tau_n <= C_up` with `C_up = max|beta| + 1`,
/// `tau_t - beta.n/2 >= c max_F |beta.n|`,
/// `tau_n - beta.n/2 >= c max(max_F |beta.n|, floor)`,
/// `tau_t >= c_d min(eps / h_F, 1)`.
pub fn audit_stabilization(
    mesh: &Mesh,
    spec: &ProblemSpec,
    params: &StabilizationParams,
    rule: &QuadratureRule,
    c: f64,
    c_d: f64,
) -> AuditReport {
    let mut rep = AuditReport {
        min_slack: [f64::INFINITY; 4],
        ..Default::default()
    };
    let mut beta_max: f64 = 0.0;
    let mut samples = Vec::new();
    for f in 0..mesh.num_facets() {
        let pts = facet_points(mesh, f, rule);
        for x in &pts {
            beta_max = beta_max.max(vecops::norm(&(spec.beta)(x)));
        }
        samples.push(pts);
    }
    let c_up = beta_max + 1.0;
    for e in 0..mesh.num_elements() {
        for l in 0..=mesh.dim() {
            let f = mesh.element_facet(e, l);
            let n = mesh.outward_normal(e, l);
            let (tt, tn) = params.get(e, l);
            let bn: Vec<f64> = samples[f].iter().map(|x| vecops::dot(&(spec.beta)(x), &n)).collect();
            let bmax = bn.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            let h = mesh.facet_diameter(f);
            for &b in &bn {
                let slack = [
                    (c_up - tt.max(tn)).min(tt.min(tn)),
                    tt - 0.5 * b - c * bmax,
                    tn - 0.5 * b - c * bmax.max(params.floor),
                    tt - c_d * (spec.epsilon / h).min(1.0),
                ];
                rep.checked_points += 1;
                for (i, s) in slack.iter().enumerate() {
                    rep.min_slack[i] = rep.min_slack[i].min(*s);
                    // relative guard for the rounding in beta.n
                    if *s < -1e-12 * (1.0 + bmax) {
                        rep.violations += 1;
                        if rep.first_violation.is_none() {
                            rep.first_violation =
                                Some(format!("element {e} facet {l}: requirement {} slack {s:.3e}", i + 1));
                        }
                    }
                }
            }
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::quadrature_rule;
    use crate::mesh::{build_unit_cube_mesh, build_unit_square_mesh, DiagonalPattern};
    use crate::problem::experiment_problem;

    #[test]
    fn constant_beta_top_face() {
        let mesh = build_unit_cube_mesh(4).unwrap();
        let spec = experiment_problem(1, 1.0).unwrap();
        let rule = quadrature_rule(2, 5).unwrap();
        let mut found = false;
        for f in mesh.boundary_facets() {
            let n = mesh.facet_normal(f);
            if (n[2] - 1.0).abs() < 1e-12 {
                let side = mesh.facet_adjacency(f).left;
                let (tt, tn) = default_stabilization(&mesh, side, &spec, &rule);
                assert!((tt - 4.0).abs() < 1e-12);
                assert!((tn - 3.0).abs() < 1e-12);
                found = true;
            }
        }
        assert!(found);
    }

    #[test]
    fn inflow_side_small_epsilon() {
        let mesh = build_unit_square_mesh(16, DiagonalPattern::default()).unwrap();
        let spec = experiment_problem(2, 1e-9).unwrap();
        let rule = quadrature_rule(1, 5).unwrap();
        for f in mesh.boundary_facets() {
            let n = mesh.facet_normal(f);
            if (n[0] + 1.0).abs() < 1e-12 {
                let (tt, tn) = default_stabilization(&mesh, mesh.facet_adjacency(f).left, &spec, &rule);
                assert!((tt - 1.6e-8).abs() < 1e-20);
                assert_eq!(tn, 0.1);
            }
        }
    }

    #[test]
    fn vanishing_advection() {
        let mesh = build_unit_square_mesh(1, DiagonalPattern::default()).unwrap();
        let mut spec = experiment_problem(2, 1.0).unwrap();
        spec.beta = crate::problem::constant_vector([0.0; 3]);
        let rule = quadrature_rule(1, 3).unwrap();
        for f in mesh.boundary_facets() {
            let (tt, tn) = default_stabilization(&mesh, mesh.facet_adjacency(f).left, &spec, &rule);
            assert_eq!((tt, tn), (1.0, 0.1));
        }
    }
}
