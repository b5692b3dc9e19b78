//! Property tests of the structural invariants.

use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use maghdg::assembly::{energy_identity, solve, Discretization, FieldSolution, QuadratureSettings};
use maghdg::basis::{build_curl_range_basis, poly_dim, quadrature_rule};
use maghdg::driver::random_polynomial;
use maghdg::linsolve::SolveOptions;
use maghdg::mesh::{build_unit_cube_mesh, build_unit_square_mesh, DiagonalPattern, ElementGeometry, Mesh};
use maghdg::norms::energy_error;
use maghdg::postprocess::{gradient_moment_residual, postprocess_curlfit, postprocess_star_2d};
use maghdg::problem::{
    constant_scalar, constant_vector, experiment_catalog, friedrichs_min_eig, zero_boundary, zero_matrix, ProblemSpec,
    VectorFn,
};
use maghdg::vecops::{self, Vec3};

fn mesh(dim: usize, n: usize) -> Arc<Mesh> {
    Arc::new(if dim == 2 {
        build_unit_square_mesh(n, DiagonalPattern::default()).unwrap()
    } else {
        build_unit_cube_mesh(n).unwrap()
    })
}

fn pattern(b: bool) -> DiagonalPattern {
    if b {
        DiagonalPattern::LowerLeftUpperRight
    } else {
        DiagonalPattern::UpperLeftLowerRight
    }
}

fn random_simplex(rng: &mut ChaCha8Rng, dim: usize) -> ElementGeometry {
    loop {
        let v: Vec<Vec3> = (0..=dim)
            .map(|_| {
                let mut p = [0.0; 3];
                for c in p.iter_mut().take(dim) {
                    *c = rng.random_range(-1.0..1.0);
                }
                p
            })
            .collect();
        let g = ElementGeometry::new(dim, &v);
        if g.det.abs() > 0.05 {
            return g;
        }
    }
}

/// Discrete triple with zero exact solution, so that the energy error is the
/// energy norm of the triple itself.
fn zero_exact(dim: usize, beta: Vec3) -> ProblemSpec {
    let z: VectorFn = constant_vector([0.0; 3]);
    ProblemSpec {
        dim,
        epsilon: 0.1,
        beta: constant_vector(beta),
        grad_beta: zero_matrix(),
        gamma: constant_scalar(1.0),
        f: z.clone(),
        g: zero_boundary(),
        exact_u: Some(z.clone()),
        exact_curl_u: Some(z),
        slit: None,
        description: "zero".into(),
    }
}

fn random_fields(disc: &Arc<Discretization>, rng: &mut ChaCha8Rng) -> FieldSolution {
    let lay = disc.layout;
    let ne = disc.mesh.num_elements();
    let mut r = |n: usize| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<f64>>();
    FieldSolution {
        disc: disc.clone(),
        w: (0..ne).map(|_| r(lay.nw())).collect(),
        u: (0..ne).map(|_| r(lay.nu())).collect(),
        lambda: r(disc.num_trace_dofs()),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mesh_invariants(n in 1usize..10, diag in any::<bool>(), three in any::<bool>()) {
        let (m, dim) = if three {
            (build_unit_cube_mesh(n.min(4)).unwrap(), 3)
        } else {
            (build_unit_square_mesh(n, pattern(diag)).unwrap(), 2)
        };
        let nn = if three { n.min(4) } else { n };
        let expected = if dim == 2 { 1.0 / (2 * nn * nn) as f64 } else { 1.0 / (6 * nn * nn * nn) as f64 };
        for e in 0..m.num_elements() {
            prop_assert!((m.element_measure(e) - expected).abs() < 1e-14);
            let mut s = [0.0; 3];
            for l in 0..=dim {
                let f = m.element_facet(e, l);
                s = vecops::add(&s, &vecops::scale(m.facet_measure(f), &m.outward_normal(e, l)));
            }
            prop_assert!(vecops::norm(&s) < 1e-12);
        }
        for f in 0..m.num_facets() {
            let adj = m.facet_adjacency(f);
            if let Some(r) = adj.right {
                let nl = m.outward_normal(adj.left.element, adj.left.local);
                let nr = m.outward_normal(r.element, r.local);
                prop_assert_eq!(nl, vecops::scale(-1.0, &nr));
            }
        }
        prop_assert!((m.domain_measure() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quadrature_integrates_monomials(dim in 1usize..4, deg in 0usize..12, seed in any::<u64>()) {
        let rule = quadrature_rule(dim, deg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = [0u32; 3];
        let mut left = rng.random_range(0..=deg) as u32;
        for c in p.iter_mut().take(dim) {
            *c = rng.random_range(0..=left);
            left -= *c;
        }
        // integral of x^a y^b z^c over the unit simplex: a! b! c! / (a + b + c + d)!
        let fact = |n: u32| (1..=n).map(|v| v as f64).product::<f64>();
        let total: u32 = p.iter().sum();
        let exact = p.iter().map(|&v| fact(v)).product::<f64>() / fact(total + dim as u32);
        let got: f64 = rule.points.iter().zip(&rule.weights)
            .map(|(x, w)| w * (0..dim).map(|i| x[i].powi(p[i] as i32)).product::<f64>())
            .sum();
        prop_assert!((got - exact).abs() <= 1e-13 * exact);
    }

    #[test]
    fn curl_map_rank(k in 0usize..3, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g2 = random_simplex(&mut rng, 2);
        prop_assert_eq!(build_curl_range_basis(2, k, &g2).unwrap().curl.len(), poly_dim(k, 2));
        let g3 = random_simplex(&mut rng, 3);
        let b = build_curl_range_basis(3, k, &g3).unwrap();
        prop_assert_eq!(b.curl.len(), 3 * poly_dim(k + 1, 3) - (poly_dim(k + 2, 3) - 1));
    }

    #[test]
    fn patch_tests_reproduce_polynomials(seed in any::<u64>(), k in 0usize..3, three in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = if three { 3 } else { 2 };
        let k = if three { k.min(1) } else { k };
        let u = random_polynomial(&mut rng, dim, k);
        let mut beta = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), 0.0];
        if three {
            beta[2] = rng.random_range(-2.0..2.0);
        }
        let eps = 10f64.powi(-rng.random_range(0..9));
        let gamma = rng.random_range(0.1..2.0);
        let spec = ProblemSpec::manufactured(dim, eps, constant_vector(beta), zero_matrix(), constant_scalar(gamma), u, "patch");
        let disc = Arc::new(Discretization::new(mesh(dim, if three { 1 } else { 2 }), spec, k, QuadratureSettings::default()).unwrap());
        let sol = solve(disc, &SolveOptions::default()).unwrap().solution;
        prop_assert!(energy_error(&sol).unwrap() < 1e-9);
    }

    #[test]
    fn energy_balance_with_homogeneous_data(seed in any::<u64>(), k in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b): (f64, f64) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        // |c0| > 1 keeps beta.n of one sign on each boundary facet, so the inflow split is exact
        let mut c0: [f64; 2] = [rng.random_range(1.05..2.0), rng.random_range(1.05..2.0)];
        for c in &mut c0 {
            if rng.random::<bool>() {
                *c = -*c;
            }
        }
        let gamma = 0.5 * (a + b).abs() + rng.random_range(0.1..1.0);
        let f0: [f64; 2] = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let spec = ProblemSpec {
            dim: 2,
            epsilon: 10f64.powi(-rng.random_range(0..6)),
            beta: Arc::new(move |x: &Vec3| [c0[0] + a * x[1], c0[1] + b * x[0], 0.0]),
            grad_beta: Arc::new(move |_: &Vec3| [[0.0, a, 0.0], [b, 0.0, 0.0], [0.0; 3]]),
            gamma: constant_scalar(gamma),
            f: Arc::new(move |x: &Vec3| [f0[0] + x[0] * x[1], f0[1] - x[1], 0.0]),
            g: zero_boundary(),
            exact_u: None,
            exact_curl_u: None,
            slit: None,
            description: "random energy".into(),
        };
        let disc = Arc::new(Discretization::new(mesh(2, 3), spec, k, QuadratureSettings::default()).unwrap());
        let sol = solve(disc, &SolveOptions::default()).unwrap().solution;
        let id = energy_identity(&sol);
        prop_assert!(id.residual < 1e-8, "{:?}", id);
        prop_assert!(id.outflow >= -1e-12);
    }

    #[test]
    fn energy_norm_triangle_inequality(seed in any::<u64>(), three in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = if three { 3 } else { 2 };
        let disc = Arc::new(Discretization::new(mesh(dim, 2), zero_exact(dim, [0.7, -0.4, 0.2]), 1, QuadratureSettings::default()).unwrap());
        let a = random_fields(&disc, &mut rng);
        let b = random_fields(&disc, &mut rng);
        let add = |x: &Vec<Vec<f64>>, y: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
            x.iter().zip(y).map(|(p, q)| p.iter().zip(q).map(|(s, t)| s + t).collect()).collect()
        };
        let sum = FieldSolution {
            disc: disc.clone(),
            w: add(&a.w, &b.w),
            u: add(&a.u, &b.u),
            lambda: a.lambda.iter().zip(&b.lambda).map(|(s, t)| s + t).collect(),
        };
        let (na, nb, ns) = (energy_error(&a).unwrap(), energy_error(&b).unwrap(), energy_error(&sum).unwrap());
        prop_assert!(ns <= na + nb + 1e-12);
    }

    #[test]
    fn postprocessing_keeps_gradient_moments(seed in any::<u64>(), k in 0usize..3, three in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = if three { 3 } else { 2 };
        let k = if three { k.min(1) } else { k };
        let disc = Arc::new(Discretization::new(mesh(dim, 1), zero_exact(dim, [1.0, 0.5, 0.0]), k, QuadratureSettings::default()).unwrap());
        let sol = random_fields(&disc, &mut rng);
        let fit = postprocess_curlfit(&sol).unwrap();
        prop_assert!(fit.max_residual < 1e-10);
        prop_assert!(gradient_moment_residual(&fit, &sol).unwrap() < 1e-11);
        if dim == 2 {
            prop_assert!(postprocess_star_2d(&sol).unwrap().max_residual < 1e-10);
        }
    }
}

#[test]
fn friedrichs_matrix_is_nonnegative_on_catalog_problems() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for id in 1..=5 {
        let exp = experiment_catalog(id).unwrap();
        for eps in [1.0, 1e-9] {
            let spec = exp.problem(eps).unwrap();
            for _ in 0..1000 {
                let mut x = [0.0; 3];
                for c in x.iter_mut().take(exp.dim) {
                    *c = rng.random_range(0.0..1.0);
                }
                let m = friedrichs_min_eig(&(spec.grad_beta)(&x), (spec.gamma)(&x), exp.dim);
                assert!(m >= -1e-12, "exp {id} at {x:?}: {m}");
            }
        }
    }
}

#[test]
fn local_postprocessing_systems_are_well_conditioned() {
    // the local matrices depend only on the element; the probe checks every
    // element shape of the uniform meshes over many random inputs
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for dim in [2, 3] {
        for k in 0..=if dim == 2 { 2 } else { 1 } {
            let disc = Arc::new(
                Discretization::new(mesh(dim, 1), zero_exact(dim, [0.3, 0.2, 0.1]), k, QuadratureSettings::default()).unwrap(),
            );
            let space = maghdg::basis::ReferenceSpace::new(dim, k + 1, disc.space.element_rule.degree, disc.space.facet_rule.degree).unwrap();
            let probe = random_fields(&disc, &mut rng);
            for e in 0..disc.mesh.num_elements() {
                let mut mats = vec![maghdg::postprocess::curlfit_system(&probe, &space, e).unwrap().0];
                if dim == 2 {
                    mats.push(maghdg::postprocess::star_system(&probe, &space, e).0);
                }
                for a in mats {
                    let sv = a.singular_values();
                    let cond = sv.max() / sv.min();
                    assert!(cond < 1e10, "dim {dim} k {k} element {e}: condition {cond:.2e}");
                }
            }
            let runs = 1000 / disc.mesh.num_elements() + 1;
            for _ in 0..runs {
                let sol = random_fields(&disc, &mut rng);
                assert!(postprocess_curlfit(&sol).unwrap().max_residual < 1e-10);
                if dim == 2 {
                    assert!(postprocess_star_2d(&sol).unwrap().max_residual < 1e-10);
                }
            }
        }
    }
}
