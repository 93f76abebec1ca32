//! The Helmholtz–Hodge projector `𝔥 X = ∇q`.
//!
//! On the torus the projection is exact in Fourier space,
//! `∇q = κ(κ·X̂)/|κ|²`, with the same derivative symbols as the operators;
//! constants (the harmonic fields of the torus) go to the solenoidal part.
//! On the square and the disk `q` solves the Neumann problem
//! `Δq = div X`, `∂_ν q = X·ν` in weak form, and `∇q` is the grid gradient.

use std::sync::Arc;

use num_complex::Complex64;

use crate::elliptic::{poisson, BoundaryCondition, EllipticProblem};
use crate::error::{Result, SgError};
use crate::grid::ops::gradient;
use crate::grid::{DomainKind, Field, Grid, ScalarField, VectorField};

#[derive(Debug, Clone)]
pub struct HodgeDecomposition {
    /// `𝔥X = ∇q`.
    pub gradient_part: VectorField,
    /// `X − ∇q`.
    pub solenoidal_part: VectorField,
    pub q: ScalarField,
    /// Iterations of the Neumann solve (zero on the torus).
    pub iterations: usize,
}

/// `𝔥` bound to one grid.
#[derive(Debug, Clone)]
pub struct HodgeProjector {
    grid: Arc<Grid>,
    neumann: Option<EllipticProblem>,
}

impl HodgeProjector {
    pub fn new(grid: &Arc<Grid>, tol: f64) -> Result<Self> {
        let neumann = match grid.kind() {
            DomainKind::Torus => None,
            _ => Some(poisson(grid, BoundaryCondition::Neumann)?.with_tolerance(tol)),
        };
        Ok(Self { grid: grid.clone(), neumann })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn project(&self, x: &VectorField) -> Result<HodgeDecomposition> {
        if !self.grid.compatible(x.grid()) {
            return Err(SgError::Config("field and projector live on different grids".into()));
        }
        let (q, gradient_part, iterations) = match &self.neumann {
            None => {
                let (q, g) = self.spectral(x);
                (q, g, 0)
            }
            Some(prob) => {
                let sol = prob.solve(x)?;
                let g = gradient(&sol.psi)?;
                (sol.psi, g, sol.iterations)
            }
        };
        let solenoidal_part = x.lin_comb(1.0, &gradient_part, -1.0);
        Ok(HodgeDecomposition { gradient_part, solenoidal_part, q, iterations })
    }

    /// Just `𝔥X`.
    pub fn gradient_part(&self, x: &VectorField) -> Result<VectorField> {
        if self.neumann.is_none() && self.grid.compatible(x.grid()) {
            return Ok(self.spectral(x).1);
        }
        Ok(self.project(x)?.gradient_part)
    }

    fn spectral(&self, x: &VectorField) -> (ScalarField, VectorField) {
        let sp = self.grid.spectral().expect("torus grids carry spectral plans");
        let n = self.grid.n();
        let kd = sp.k_deriv();
        let xs = sp.forward(&x.x);
        let ys = sp.forward(&x.y);
        let zero = Complex64::new(0.0, 0.0);
        let mut gx = vec![zero; n * n];
        let mut gy = vec![zero; n * n];
        let mut qs = vec![zero; n * n];
        for i in 0..n {
            for j in 0..n {
                let (kx, ky) = (kd[i], kd[j]);
                let k2 = kx * kx + ky * ky;
                if k2 == 0.0 {
                    continue;
                }
                let idx = i * n + j;
                let dot = xs[idx] * kx + ys[idx] * ky;
                gx[idx] = dot * (kx / k2);
                gy[idx] = dot * (ky / k2);
                qs[idx] = dot * Complex64::new(0.0, -1.0 / k2);
            }
        }
        let g = VectorField::new(self.grid.clone(), sp.inverse(gx), sp.inverse(gy));
        (ScalarField::new(self.grid.clone(), sp.inverse(qs)), g)
    }
}

/// One-off projection of `x`.
pub fn project(x: &VectorField) -> Result<HodgeDecomposition> {
    HodgeProjector::new(x.grid(), 1e-12)?.project(x)
}

/// `(α¹, α²)`: the domain means of the solenoidal part of `x`, i.e. its
/// pairing with the harmonic fields `∂/∂x^k` of the torus.
pub fn harmonic_residual(x: &VectorField, dec: &HodgeDecomposition) -> Result<(f64, f64)> {
    if x.grid().kind() != DomainKind::Torus {
        return Err(SgError::UnsupportedDomain { op: "harmonic_residual", domain: x.grid().kind().name() });
    }
    let [a1, a2] = dec.solenoidal_part.mean();
    Ok((a1, a2))
}
