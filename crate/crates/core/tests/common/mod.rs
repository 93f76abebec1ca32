//! Shared fixtures for the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use sg_core::elliptic::{assemble_coefficients, BoundaryCondition};
use sg_core::grid::{l2_norm, DomainSpec, Field, Grid, MatrixField, ScalarField, VectorField};

/// Pointwise coefficients with `λ_min(A) ≥ 0.5` and a nonzero skew potential.
pub fn coefficient_values(x: f64, y: f64) -> ([[f64; 2]; 2], f64) {
    let off = 0.2 * (x + 0.5 * y).sin();
    (
        [[1.2 + 0.3 * x.cos() * y.sin(), off], [off, 1.0 + 0.25 * (x - y).cos()]],
        0.4 * (x + 2.0 * y).cos(),
    )
}

pub fn coefficients(grid: &Arc<Grid>) -> (MatrixField, ScalarField) {
    (
        MatrixField::from_fn(grid, |x, y| coefficient_values(x, y).0),
        ScalarField::from_fn(grid, |x, y| coefficient_values(x, y).1),
    )
}

/// `(A + Ã)g` for the coefficients above.
pub fn flux_for(x: f64, y: f64, g: [f64; 2]) -> [f64; 2] {
    let (a, f) = coefficient_values(x, y);
    [a[0][0] * g[0] + (a[0][1] + f) * g[1], (a[1][0] - f) * g[0] + a[1][1] * g[1]]
}

/// `L²` error of the solution for `ψ* = sin x sin y` (mean removed for the
/// singular conditions).
pub fn mms_error(domain: DomainSpec, n: usize, bc: BoundaryCondition) -> (f64, usize) {
    let grid = Grid::new(domain, n).unwrap();
    let (a, f) = coefficients(&grid);
    let prob = assemble_coefficients(&a, &f, bc).unwrap().with_tolerance(1e-12);
    let flux = VectorField::from_fn(&grid, |x, y| flux_for(x, y, [x.cos() * y.sin(), x.sin() * y.cos()]));
    let sol = prob.solve(&flux).unwrap();
    let exact = ScalarField::from_fn(&grid, |x, y| x.sin() * y.sin());
    let mut err = sol.psi.lin_comb(1.0, &exact, -1.0);
    if bc != BoundaryCondition::Dirichlet {
        let m = err.mean();
        err.data.iter_mut().for_each(|v| *v -= m);
    }
    (l2_norm(&err), sol.iterations)
}

/// Random trigonometric polynomial with integer wavenumbers up to `kmax`
/// and amplitudes decaying like `1/(1 + |κ|²)`.
#[derive(Debug, Clone)]
pub struct TrigPoly {
    terms: Vec<(f64, f64, f64, f64)>,
}

impl TrigPoly {
    pub fn random(rng: &mut ChaCha8Rng, kmax: i32) -> Self {
        let mut terms = Vec::new();
        for kx in -kmax..=kmax {
            for ky in 0..=kmax {
                let decay = 1.0 / (1.0 + (kx * kx + ky * ky) as f64);
                terms.push((kx as f64, ky as f64, decay * rng.gen_range(-1.0..1.0), decay * rng.gen_range(-1.0..1.0)));
            }
        }
        Self { terms }
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        // e^{i(kx x + ky y)} from powers of e^{ix} and e^{iy}
        let (ex, ey) = (Complex64::from_polar(1.0, x), Complex64::from_polar(1.0, y));
        self.terms.iter().map(|(kx, ky, a, b)| {
            let z = ex.powi(*kx as i32) * ey.powi(*ky as i32);
            a * z.re + b * z.im
        }).sum()
    }

    pub fn gradient(&self, x: f64, y: f64) -> [f64; 2] {
        let mut g = [0.0; 2];
        for (kx, ky, a, b) in &self.terms {
            let t = kx * x + ky * y;
            let d = -a * t.sin() + b * t.cos();
            g[0] += kx * d;
            g[1] += ky * d;
        }
        g
    }

    pub fn scalar(&self, grid: &Arc<Grid>) -> ScalarField {
        ScalarField::from_fn(grid, |x, y| self.value(x, y))
    }
}

/// Random band-limited vector field from two independent polynomials.
pub fn random_vector(rng: &mut ChaCha8Rng, kmax: i32) -> (TrigPoly, TrigPoly) {
    (TrigPoly::random(rng, kmax), TrigPoly::random(rng, kmax))
}

pub fn sample_vector(grid: &Arc<Grid>, v: &(TrigPoly, TrigPoly)) -> VectorField {
    VectorField::from_fn(grid, |x, y| [v.0.value(x, y), v.1.value(x, y)])
}

/// Least-squares slope of `log2(err)` against `-log2(n)`.
pub fn fitted_order(ns: &[usize], errs: &[f64]) -> f64 {
    let xs: Vec<f64> = ns.iter().map(|n| (*n as f64).log2()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| -e.log2()).collect();
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}
