//! Differential and pointwise operators on fields.
//!
//! Torus derivatives are spectral; square and disk derivatives are centred
//! second-order differences with one-sided second-order closures at the
//! boundary (and the parity closure across the pole for the disk).

use std::sync::Arc;

use super::field::{Field, MatrixField, ScalarField, VectorField};
use super::mesh::{Grid, MIN_RESOLUTION};
use crate::error::{Result, SgError};

fn check_resolution(grid: &Grid) -> Result<()> {
    if grid.n() < MIN_RESOLUTION {
        return Err(SgError::Config(format!(
            "resolution {} too small for differentiation (need >= {MIN_RESOLUTION})",
            grid.n()
        )));
    }
    Ok(())
}

/// `∇f`.
pub fn gradient(f: &ScalarField) -> Result<VectorField> {
    check_resolution(f.grid())?;
    let [dx, dy] = f.grid().partials(&f.data);
    Ok(VectorField::new(f.grid().clone(), dx, dy))
}

/// Counter-clockwise rotation by π/2: `(v¹, v²) ↦ (-v², v¹)`.
pub fn perp(v: &VectorField) -> VectorField {
    let x = v.y.iter().map(|a| -a).collect();
    VectorField::new(v.grid().clone(), x, v.x.clone())
}

/// `∇⊥f = J∇f = (-∂_y f, ∂_x f)`.
pub fn perp_gradient(f: &ScalarField) -> Result<VectorField> {
    Ok(perp(&gradient(f)?))
}

/// Pointwise 2×2 cofactor `-JMJ`: `[[a, b], [c, d]] ↦ [[d, -c], [-b, a]]`.
pub fn cofactor(m: &MatrixField) -> MatrixField {
    let neg = |v: &Vec<f64>| v.iter().map(|a| -a).collect::<Vec<_>>();
    MatrixField::new(m.grid().clone(), [m.m[3].clone(), neg(&m.m[2]), neg(&m.m[1]), m.m[0].clone()])
}

/// `div v = ∂_x v¹ + ∂_y v²`. On the disk it is evaluated in polar form,
/// `(∂_r(r v_r) + ∂_θ v_θ)/r`, which vanishes exactly on grid `∇⊥`.
pub fn divergence(v: &VectorField) -> Result<ScalarField> {
    check_resolution(v.grid())?;
    let g = v.grid();
    if g.kind() == super::domain::DomainKind::Disk {
        return Ok(polar_div(g, v, false));
    }
    let [dxx, _] = g.partials(&v.x);
    let [_, dyy] = g.partials(&v.y);
    let data = dxx.iter().zip(&dyy).map(|(a, b)| a + b).collect();
    Ok(ScalarField::new(g.clone(), data))
}

/// `curl v = ∂_x v² - ∂_y v¹`. On the disk it is evaluated in polar form,
/// `(∂_r(r v_θ) - ∂_θ v_r)/r`, which vanishes exactly on grid gradients.
pub fn curl(v: &VectorField) -> Result<ScalarField> {
    check_resolution(v.grid())?;
    let g = v.grid();
    if g.kind() == super::domain::DomainKind::Disk {
        return Ok(polar_div(g, v, true));
    }
    let [_, dyx] = g.partials(&v.x);
    let [dxy, _] = g.partials(&v.y);
    let data = dxy.iter().zip(&dyx).map(|(a, b)| a - b).collect();
    Ok(ScalarField::new(g.clone(), data))
}

/// `(∂_r(r a) + ∂_θ b)/r` with `(a, b) = (v_r, v_θ)`, or `(v_θ, −v_r)` for
/// the curl.
fn polar_div(g: &Arc<Grid>, v: &VectorField, rotate: bool) -> ScalarField {
    let n = g.n();
    let (c, s) = (g.cos_theta(), g.sin_theta());
    let mut ra = vec![0.0; n * n];
    let mut b = vec![0.0; n * n];
    for i in 0..n {
        let r = g.radius(i);
        for j in 0..n {
            let k = i * n + j;
            let vr = c[j] * v.x[k] + s[j] * v.y[k];
            let vt = c[j] * v.y[k] - s[j] * v.x[k];
            let (a, bb) = if rotate { (vt, -vr) } else { (vr, vt) };
            ra[k] = r * a;
            b[k] = bb;
        }
    }
    let da = g.fd_axis0(&ra);
    let db = g.fd_axis1(&b);
    let data = (0..n * n).map(|k| (da[k] + db[k]) / g.radius(k / n)).collect();
    ScalarField::new(g.clone(), data)
}

/// Jacobian `(Dv)_{kj} = ∂_j v^k`.
pub fn jacobian(v: &VectorField) -> Result<MatrixField> {
    check_resolution(v.grid())?;
    let g = v.grid();
    let [a, b] = g.partials(&v.x);
    let [c, d] = g.partials(&v.y);
    Ok(MatrixField::new(g.clone(), [a, b, c, d]))
}

/// Hessian of a scalar, symmetrised.
pub fn hessian(f: &ScalarField) -> Result<MatrixField> {
    Ok(jacobian(&gradient(f)?)?.symmetric_part())
}

/// Column-wise divergence `div(A)^j = Σ_i ∂_i A_{ij}`, so that
/// `div(A∇φ) = Tr(A D²φ) + div(A)·∇φ`.
pub fn divergence_matrix(m: &MatrixField) -> Result<VectorField> {
    check_resolution(m.grid())?;
    let g = m.grid();
    let [d1_m11, _] = g.partials(&m.m[0]);
    let [_, d2_m21] = g.partials(&m.m[2]);
    let [d1_m12, _] = g.partials(&m.m[1]);
    let [_, d2_m22] = g.partials(&m.m[3]);
    let x = d1_m11.iter().zip(&d2_m21).map(|(a, b)| a + b).collect();
    let y = d1_m12.iter().zip(&d2_m22).map(|(a, b)| a + b).collect();
    Ok(VectorField::new(g.clone(), x, y))
}

/// Pointwise product of a scalar field with any field.
pub fn scale_by<F: Field>(s: &[f64], f: &F) -> F {
    f.map_components(|c| c.iter().zip(s).map(|(a, b)| a * b).collect())
}

/// Pointwise `exp(a·V + b·φ)` of the grid potentials.
pub fn potential_weight(grid: &Arc<Grid>, a: f64, b: f64) -> Vec<f64> {
    grid.conformal()
        .iter()
        .zip(grid.coriolis())
        .map(|(v, p)| (a * v + b * p).exp())
        .collect()
}

/// Pointwise outer product `a ⊗ b`, `(a⊗b)_{ij} = a_i b_j`.
pub fn outer(a: &VectorField, b: &VectorField) -> MatrixField {
    let len = a.grid().len();
    let mut m = [vec![0.0; len], vec![0.0; len], vec![0.0; len], vec![0.0; len]];
    for k in 0..len {
        m[0][k] = a.x[k] * b.x[k];
        m[1][k] = a.x[k] * b.y[k];
        m[2][k] = a.y[k] * b.x[k];
        m[3][k] = a.y[k] * b.y[k];
    }
    MatrixField::new(a.grid().clone(), m)
}
