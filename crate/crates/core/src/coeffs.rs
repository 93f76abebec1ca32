//! Coefficients of the flattened system.
//!
//! For a vector field `ξ` (in practice a mollified pressure gradient):
//!
//! * `B[ξ] = ∇V⊗ξ + ξ⊗∇V − ⟨ξ,∇V⟩I + ξ⊗∇φ`, split into
//!   `Bˢ = (∇V+∇φ/2)⊗ξ + ξ⊗(∇V+∇φ/2) − ⟨ξ,∇V⟩I` and `Bᵃˢ = ½(ξ⊗∇φ − ∇φ⊗ξ)`;
//! * `Q[Dξ,ξ] = e^{2V+2φ} Cof(Dξᵀ + Bˢ[ξ])`;
//! * the elliptic matrix `A = e^{-2φ}(I + Q)`, the first-order potential
//!   `f = e^{2V} Bᵃˢ₁₂` and the flux `F = −e^{-φ} ξ`.
//!
//! The potentials are taken from the grid the fields live on.

use crate::error::{Result, SgError};
use crate::grid::ops::{cofactor, hessian, jacobian};
use crate::grid::{Field, MatrixField, ScalarField, VectorField};
use crate::mollify::MollifierPlan;

/// Absolute asymmetry (relative to the largest entry, floored at one)
/// tolerated before the stability eigenvalue refuses its input.
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

fn ensure_same_grid<A: Field, B: Field>(a: &A, b: &B) -> Result<()> {
    if a.grid().compatible(b.grid()) {
        Ok(())
    } else {
        Err(SgError::Config("coefficient inputs live on different grids".into()))
    }
}

/// `(B, Bˢ, Bᵃˢ)` for `ξ`.
pub fn build_b(xi: &VectorField) -> (MatrixField, MatrixField, MatrixField) {
    let g = xi.grid();
    let [vx, vy] = g.conformal_grad();
    let [px, py] = g.coriolis_grad();
    let len = g.len();
    let mut b = [vec![0.0; len], vec![0.0; len], vec![0.0; len], vec![0.0; len]];
    let mut bs = b.clone();
    let mut bas = b.clone();
    for k in 0..len {
        let (x1, x2) = (xi.x[k], xi.y[k]);
        let dot = x1 * vx[k] + x2 * vy[k];
        b[0][k] = 2.0 * vx[k] * x1 - dot + x1 * px[k];
        b[1][k] = vx[k] * x2 + x1 * vy[k] + x1 * py[k];
        b[2][k] = vy[k] * x1 + x2 * vx[k] + x2 * px[k];
        b[3][k] = 2.0 * vy[k] * x2 - dot + x2 * py[k];
        let (wx, wy) = (vx[k] + 0.5 * px[k], vy[k] + 0.5 * py[k]);
        bs[0][k] = 2.0 * wx * x1 - dot;
        bs[1][k] = wx * x2 + x1 * wy;
        bs[2][k] = bs[1][k];
        bs[3][k] = 2.0 * wy * x2 - dot;
        let a = 0.5 * (x1 * py[k] - x2 * px[k]);
        bas[1][k] = a;
        bas[2][k] = -a;
    }
    (MatrixField::new(g.clone(), b), MatrixField::new(g.clone(), bs), MatrixField::new(g.clone(), bas))
}

fn weighted(m: &MatrixField, a: f64, b: f64) -> MatrixField {
    let w = crate::grid::ops::potential_weight(m.grid(), a, b);
    crate::grid::ops::scale_by(&w, m)
}

/// `Q = e^{2V+2φ} Cof(Dξᵀ + Bˢ[ξ])` with `Dξ` supplied as `hess_p`.
pub fn build_q(grad_p: &VectorField, hess_p: &MatrixField) -> Result<MatrixField> {
    ensure_same_grid(grad_p, hess_p)?;
    let (_, bs, _) = build_b(grad_p);
    let inner = hess_p.transpose().lin_comb(1.0, &bs, 1.0);
    Ok(weighted(&cofactor(&inner), 2.0, 2.0))
}

/// The stability matrix as written without the cofactor,
/// `e^{2V+2φ}(Dξᵀ + Bˢ[ξ])`. It has the same spectrum as [`build_q`] on
/// symmetric input and is used only to validate initial data.
pub fn intro_stability_matrix(grad_p: &VectorField, hess_p: &MatrixField) -> Result<MatrixField> {
    ensure_same_grid(grad_p, hess_p)?;
    let (_, bs, _) = build_b(grad_p);
    Ok(weighted(&hess_p.transpose().lin_comb(1.0, &bs, 1.0), 2.0, 2.0))
}

/// Smallest eigenvalue of a symmetric 2×2 `[[a, b], [b, d]]`.
#[inline]
pub fn lambda_min_sym(a: f64, b: f64, d: f64) -> f64 {
    let m = 0.5 * (a + d);
    let r = (0.5 * (a - d)).hypot(b);
    m - r
}

/// `(μ, μ(x))` with `μ(x) = −λ_min(Q(x))` and `μ = max_x μ(x)`.
pub fn stability_eigenvalue(q: &MatrixField) -> Result<(f64, ScalarField)> {
    let scale = q.max_abs().max(1.0);
    let asym = q.max_asymmetry();
    if asym > SYMMETRY_TOLERANCE * scale {
        return Err(SgError::Numerical(format!(
            "stability matrix is not symmetric (max |Q12 - Q21| = {asym:.3e})"
        )));
    }
    let data: Vec<f64> = (0..q.grid().len())
        .map(|k| -lambda_min_sym(q.m[0][k], 0.5 * (q.m[1][k] + q.m[2][k]), q.m[3][k]))
        .collect();
    let field = ScalarField::new(q.grid().clone(), data);
    Ok((field.max(), field))
}

/// Everything the elliptic solve and the monitors need at one instant.
#[derive(Debug, Clone)]
pub struct CoeffBundle {
    /// The (mollified) gradient the coefficients were built from.
    pub xi: VectorField,
    /// Symmetrised Jacobian of `xi`.
    pub dxi: MatrixField,
    pub q: MatrixField,
    /// `e^{-2φ}(I + Q)`.
    pub a: MatrixField,
    /// `f = e^{2V} Bᵃˢ₁₂`.
    pub b_potential: ScalarField,
    /// `F = −e^{-φ} ξ`.
    pub f_rhs: VectorField,
    pub mu: f64,
    pub mu_field: ScalarField,
}

impl CoeffBundle {
    /// Node where `μ(x)` is largest.
    pub fn worst_node(&self) -> (f64, f64) {
        self.mu_field.grid().coords(self.mu_field.argmax())
    }

    /// `min_x e^{-2φ(x)}(1 − μ(x))`, a lower bound on `λ_min(A)`.
    pub fn ellipticity(&self) -> f64 {
        let g = self.a.grid();
        g.coriolis()
            .iter()
            .zip(&self.mu_field.data)
            .map(|(p, m)| (-2.0 * p).exp() * (1.0 - m))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Assemble the coefficient bundle from `grad_p`, mollifying first when a
/// plan is given. Refuses with `StabilityViolation` once `μ ≥ 1`.
pub fn build_bundle(grad_p: &VectorField, mollifier: Option<&MollifierPlan>) -> Result<CoeffBundle> {
    let xi = match mollifier {
        Some(plan) => plan.apply(grad_p)?,
        None => grad_p.clone(),
    };
    let dxi = jacobian(&xi)?.symmetric_part();
    bundle_from_parts(xi, dxi)
}

/// Bundle for a scalar potential `p`, using its symmetrised Hessian.
pub fn build_bundle_from_potential(p: &ScalarField) -> Result<CoeffBundle> {
    let xi = crate::grid::ops::gradient(p)?;
    bundle_from_parts(xi, hessian(p)?)
}

fn bundle_from_parts(xi: VectorField, dxi: MatrixField) -> Result<CoeffBundle> {
    let g = xi.grid().clone();
    let q = build_q(&xi, &dxi)?;
    let (mu, mu_field) = stability_eigenvalue(&q)?;
    if mu >= 1.0 {
        let (x, y) = g.coords(mu_field.argmax());
        return Err(SgError::StabilityViolation { mu, limit: 1.0, x, y });
    }
    let e2p = crate::grid::ops::potential_weight(&g, 0.0, -2.0);
    let a = crate::grid::ops::scale_by(&e2p, &MatrixField::identity(&g).lin_comb(1.0, &q, 1.0));
    let (_, _, bas) = build_b(&xi);
    let e2v = crate::grid::ops::potential_weight(&g, 2.0, 0.0);
    let b_potential = ScalarField::new(g.clone(), bas.m[1].iter().zip(&e2v).map(|(b, w)| b * w).collect());
    let emp = crate::grid::ops::potential_weight(&g, 0.0, -1.0);
    let f_rhs = crate::grid::ops::scale_by(&emp, &xi).scaled(-1.0);
    Ok(CoeffBundle { xi, dxi, q, a, b_potential, f_rhs, mu, mu_field })
}
