use std::f64::consts::PI;

mod common;

use common::{coefficients, flux_for, TrigPoly};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sg_core::coeffs::build_bundle;
use sg_core::diagnostics::elliptic_estimate_ratio;
use sg_core::elliptic::{assemble, assemble_coefficients, energy_bound_check, poisson, BoundaryCondition};
use sg_core::grid::ops::{divergence, divergence_matrix, gradient, perp_gradient, potential_weight, scale_by};
use sg_core::grid::{l2_norm, sobolev_norm, DomainSpec, Field, Grid, ScalarField, ScalarFn, VectorField};

fn mms(domain: DomainSpec, n: usize, bc: BoundaryCondition) -> f64 {
    let (e, iters) = common::mms_error(domain, n, bc);
    eprintln!("n={n} iters={iters} err={e:e}");
    e
}

#[test]
fn manufactured_solution_converges_on_square() {
    let e: Vec<f64> = [32, 64, 128].iter().map(|&n| mms(DomainSpec::square(PI), n, BoundaryCondition::Dirichlet)).collect();
    assert!(e[0] / e[1] > 3.5 && e[1] / e[2] > 3.5, "{e:?}");
}

#[test]
fn manufactured_solution_converges_on_torus() {
    let e: Vec<f64> =
        [32, 64, 128].iter().map(|&n| mms(DomainSpec::standard_torus(), n, BoundaryCondition::PeriodicZeroMean)).collect();
    assert!(e[0] / e[1] > 3.5 && e[1] / e[2] > 3.5, "{e:?}");
}

#[test]
fn laplacian_recovers_sine_on_torus() {
    let grid = Grid::new(DomainSpec::standard_torus(), 64).unwrap();
    let prob = poisson(&grid, BoundaryCondition::PeriodicZeroMean).unwrap();
    let flux = VectorField::from_fn(&grid, |x, _| [x.cos(), 0.0]);
    let sol = prob.solve(&flux).unwrap();
    let exact = ScalarField::from_fn(&grid, |x, _| x.sin());
    assert!(sol.psi.lin_comb(1.0, &exact, -1.0).max_abs() < 2e-3);
    assert!(sol.iterations <= 2, "{}", sol.iterations);
    let ratio = energy_bound_check(&prob, &sol);
    assert!((ratio - 1.0).abs() < 1e-3, "{ratio}");
}

fn disk_exact(x: f64, y: f64) -> (f64, [f64; 2]) {
    let r2 = 0.81 - x * x - y * y;
    let g = 1.0 + x * y + (2.0 * x).sin();
    (r2 * g, [-2.0 * x * g + r2 * (y + 2.0 * (2.0 * x).cos()), -2.0 * y * g + r2 * x])
}

fn disk_error(n: usize) -> f64 {
    let grid = Grid::new(DomainSpec::disk(0.9), n).unwrap();
    let (a, f) = coefficients(&grid);
    let prob = assemble_coefficients(&a, &f, BoundaryCondition::Dirichlet).unwrap().with_tolerance(1e-12);
    let flux = VectorField::from_fn(&grid, |x, y| {
        flux_for(x, y, disk_exact(x, y).1)
    });
    let sol = prob.solve(&flux).unwrap();
    let exact = ScalarField::from_fn(&grid, |x, y| disk_exact(x, y).0);
    let e = l2_norm(&sol.psi.lin_comb(1.0, &exact, -1.0));
    eprintln!("disk n={n} iters={} err={e:e}", sol.iterations);
    e
}

#[test]
fn manufactured_solution_converges_on_disk() {
    let e: Vec<f64> = [32, 64, 128].iter().map(|&n| disk_error(n)).collect();
    assert!(e[0] / e[1] > 3.2 && e[1] / e[2] > 3.2, "{e:?}");
}

fn neumann_error(domain: DomainSpec, n: usize) -> f64 {
    let grid = Grid::new(domain, n).unwrap();
    let prob = poisson(&grid, BoundaryCondition::Neumann).unwrap().with_tolerance(1e-12);
    let flux = VectorField::from_fn(&grid, |x, y| disk_exact(x, y).1);
    let sol = prob.solve(&flux).unwrap();
    let exact = ScalarField::from_fn(&grid, |x, y| disk_exact(x, y).0);
    let mut err = sol.psi.lin_comb(1.0, &exact, -1.0);
    let m = err.mean();
    err.data.iter_mut().for_each(|v| *v -= m);
    eprintln!("neumann n={n} iters={} err={:e} defect={:e}", sol.iterations, l2_norm(&err), sol.compatibility_defect);
    l2_norm(&err)
}

#[test]
fn neumann_problem_converges_on_square_and_disk() {
    for dom in [DomainSpec::square(1.3), DomainSpec::disk(0.9)] {
        let e: Vec<f64> = [32, 64, 128].iter().map(|&n| neumann_error(dom.clone(), n)).collect();
        assert!(e[0] / e[1] > 3.2 && e[1] / e[2] > 3.2, "{e:?}");
    }
}

fn domains() -> Vec<(DomainSpec, BoundaryCondition)> {
    vec![
        (DomainSpec::standard_torus(), BoundaryCondition::PeriodicZeroMean),
        (DomainSpec::square(PI), BoundaryCondition::Dirichlet),
        (DomainSpec::square(PI), BoundaryCondition::Neumann),
        (DomainSpec::disk(1.0), BoundaryCondition::Dirichlet),
    ]
}

fn random_scalar(grid: &std::sync::Arc<Grid>, seed: u64) -> ScalarField {
    TrigPoly::random(&mut ChaCha8Rng::seed_from_u64(seed), 3).scalar(grid)
}

fn dot(a: &ScalarField, b: &ScalarField) -> f64 {
    a.data.iter().zip(&b.data).map(|(x, y)| x * y).sum()
}

fn norm(a: &ScalarField) -> f64 {
    dot(a, a).sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// Without the first-order term the discrete operator is symmetric, and
    /// adding that term leaves the quadratic form untouched.
    #[test]
    fn operator_symmetry_and_skew_term(seed in any::<u64>()) {
        for (dom, bc) in domains() {
            let grid = Grid::new(dom, 24).unwrap();
            let (a, f) = coefficients(&grid);
            let sym = assemble_coefficients(&a, &ScalarField::zeros(&grid), bc).unwrap();
            let full = assemble_coefficients(&a, &f, bc).unwrap();
            let (u, v) = (random_scalar(&grid, seed), random_scalar(&grid, seed ^ 0x5eed));
            // the operator is a(ψ, e_k), so its symmetry is in the plain dot product
            let (ku, kv) = (sym.apply(&u), sym.apply(&v));
            let scale = norm(&ku) * norm(&v) + norm(&kv) * norm(&u);
            let asym = (dot(&ku, &v) - dot(&u, &kv)).abs();
            prop_assert!(asym <= 1e-10 * scale, "{bc:?}: {asym:e}");
            let quad = (dot(&ku, &u) - dot(&full.apply(&u), &u)).abs();
            prop_assert!(quad <= 1e-10 * norm(&ku) * norm(&u), "{bc:?}: {quad:e}");
        }
    }
}

#[test]
fn zero_flux_gives_zero_potential() {
    for (dom, bc) in domains() {
        let grid = Grid::new(dom, 32).unwrap();
        let (a, f) = coefficients(&grid);
        let sol = assemble_coefficients(&a, &f, bc).unwrap().solve(&VectorField::zeros(&grid)).unwrap();
        assert_eq!(sol.psi.max_abs(), 0.0);
        assert_eq!(energy_bound_check(&assemble_coefficients(&a, &f, bc).unwrap(), &sol), 0.0);
    }
}

#[test]
fn resting_sphere_has_coriolis_scaled_coefficients() {
    let omega = 1.5;
    let grid = Grid::new(DomainSpec::spherical_cap(omega, 0.5), 32).unwrap();
    let b = build_bundle(&VectorField::zeros(&grid), None).unwrap();
    for k in 0..grid.len() {
        let (x, y) = grid.coords(k);
        let r2 = x * x + y * y;
        let expected = (2.0 * omega * (1.0 - r2) / (1.0 + r2)).powi(2);
        let [[a11, a12], [a21, a22]] = b.a.at(k);
        assert!((a11 - expected).abs() < 1e-12 && (a22 - expected).abs() < 1e-12);
        assert!(a12 == 0.0 && a21 == 0.0);
        if r2 < 1e-3 {
            assert!((a11 - 4.0 * omega * omega).abs() < 1e-2 * omega * omega);
        }
    }
}

#[test]
fn energy_bound_holds_for_manufactured_solutions() {
    for (dom, bc) in domains() {
        let grid = Grid::new(dom, 128).unwrap();
        let (a, f) = coefficients(&grid);
        let prob = assemble_coefficients(&a, &f, bc).unwrap().with_tolerance(1e-12);
        let flux = VectorField::from_fn(&grid, |x, y| flux_for(x, y, [x.cos() * y.sin(), x.sin() * y.cos()]));
        let ratio = energy_bound_check(&prob, &prob.solve(&flux).unwrap());
        assert!(ratio > 0.0 && ratio <= 1.05, "{bc:?}: {ratio}");
    }
}

#[test]
fn velocity_is_incompressible() {
    for (dom, bc) in domains() {
        let grid = Grid::new(dom, 64).unwrap();
        let (a, f) = coefficients(&grid);
        let flux = VectorField::from_fn(&grid, |x, y| [(x + y).sin(), (x * y).cos()]);
        let sol = assemble_coefficients(&a, &f, bc).unwrap().solve(&flux).unwrap();
        // the Riemannian divergence of u is e^{2V} div(e^{-2V} u)
        let transported = scale_by(&potential_weight(&grid, -2.0, 0.0), &sol.velocity);
        let d = l2_norm(&divergence(&transported).unwrap());
        assert!(d <= 1e-10 * l2_norm(&sol.velocity), "{:?} {bc:?}: {d:e}", grid.kind());
    }
}

/// The global elliptic estimate on a fixed family of smooth states. The
/// ratio spreads over many decades because of the large powers of `λ` and
/// `M`, so fresh instances are held to ten times the fitted constant.
#[test]
fn global_estimate_constant_holds_on_fresh_instances() {
    let v = ScalarFn::from_closures("v", |x, y| 0.1 * x.sin() * y.cos(), |x, y| {
        [0.1 * x.cos() * y.cos(), -0.1 * x.sin() * y.sin()]
    });
    let phi = ScalarFn::from_closures("phi", |x, y| 0.2 * (x + y).cos(), |x, y| [-0.2 * (x + y).sin(); 2]);
    let grid = Grid::new(DomainSpec::standard_torus().with_potentials(v, phi), 64).unwrap();
    let k = 2;
    let ratio = |seed: u64| {
        let xi = gradient(&random_scalar(&grid, seed).scaled(0.1)).unwrap();
        let b = build_bundle(&xi, None).unwrap();
        let prob = assemble(&b, BoundaryCondition::PeriodicZeroMean).unwrap();
        let sol = prob.solve(&b.f_rhs).unwrap();
        let m = sobolev_norm(&b.a, k - 1).unwrap()
            + sobolev_norm(&divergence_matrix(&b.a).unwrap(), k - 1).unwrap()
            + sobolev_norm(&perp_gradient(&b.b_potential).unwrap(), k - 1).unwrap();
        let psi_hk = sobolev_norm(&sol.grad_psi, k).unwrap();
        elliptic_estimate_ratio(psi_hk, prob.lambda(), m, sobolev_norm(&b.f_rhs, k).unwrap(), k)
    };
    let c = (0..10).map(ratio).fold(0.0, f64::max);
    assert!(c.is_finite() && c > 0.0 && c < 1.0);
    for seed in 10..110 {
        let r = ratio(seed);
        assert!(r <= 10.0 * c, "instance {seed}: {r:e} > 10 x {c:e}");
    }
}
