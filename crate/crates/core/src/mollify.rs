//! The regularising operator `𝔦_ε`.
//!
//! On the torus it is the Fourier multiplier `exp(-ε²|κ|²/2)` (a Gaussian of
//! standard deviation `ε`), which commutes with the spectral derivatives and
//! is self-adjoint. On the square and the disk it is a convolution with the
//! compact bump `exp(-1/(1-(r/ε)²))` of support radius `ε`, applied to the
//! even reflection of the field across the boundary and renormalised per
//! node so that constants are reproduced exactly. The boundary treatment is
//! a pragmatic choice; near `∂Ω` the bounded-domain mollifier is neither
//! exactly self-adjoint nor commuting with differentiation.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Result, SgError};
use crate::grid::{l2_norm, DomainKind, Field, Grid, ScalarField, VectorField};

/// Kernel family, fixed by the domain kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MollifierKernel {
    SpectralGaussian,
    BumpConvolution,
}

impl MollifierKernel {
    pub fn for_domain(kind: DomainKind) -> Self {
        match kind {
            DomainKind::Torus => MollifierKernel::SpectralGaussian,
            DomainKind::Square | DomainKind::Disk => MollifierKernel::BumpConvolution,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mollifier {
    epsilon: f64,
}

impl Mollifier {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(SgError::Config(format!("mollification scale must be positive, got {epsilon}")));
        }
        Ok(Self { epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Precompute the operator on `grid`.
    pub fn plan(&self, grid: &Arc<Grid>) -> MollifierPlan {
        MollifierPlan::new(grid, self.epsilon)
    }
}

/// `𝔦_ε` bound to one grid. Building it is the expensive part on bounded
/// domains; application is a sparse matrix-vector product.
#[derive(Debug, Clone)]
pub struct MollifierPlan {
    grid: Arc<Grid>,
    epsilon: f64,
    op: Operator,
}

#[derive(Debug, Clone)]
enum Operator {
    Spectral,
    Sparse { offsets: Vec<usize>, cols: Vec<u32>, vals: Vec<f64> },
}

fn bump(s2: f64) -> f64 {
    if s2 >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s2)).exp()
    }
}

impl MollifierPlan {
    pub fn new(grid: &Arc<Grid>, epsilon: f64) -> Self {
        let op = match MollifierKernel::for_domain(grid.kind()) {
            MollifierKernel::SpectralGaussian => Operator::Spectral,
            MollifierKernel::BumpConvolution => {
                let rows: Vec<Vec<(u32, f64)>> =
                    (0..grid.len()).into_par_iter().map(|t| bump_row(grid, epsilon, t)).collect();
                let mut offsets = Vec::with_capacity(rows.len() + 1);
                let mut cols = Vec::new();
                let mut vals = Vec::new();
                offsets.push(0);
                for row in rows {
                    for (c, v) in row {
                        cols.push(c);
                        vals.push(v);
                    }
                    offsets.push(cols.len());
                }
                Operator::Sparse { offsets, cols, vals }
            }
        };
        Self { grid: grid.clone(), epsilon, op }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn kernel(&self) -> MollifierKernel {
        match self.op {
            Operator::Spectral => MollifierKernel::SpectralGaussian,
            Operator::Sparse { .. } => MollifierKernel::BumpConvolution,
        }
    }

    /// Mollify one nodal array.
    pub fn apply_data(&self, data: &[f64]) -> Vec<f64> {
        match &self.op {
            Operator::Spectral => {
                let sp = self.grid.spectral().expect("torus grids carry spectral plans");
                let e2 = self.epsilon * self.epsilon;
                sp.apply_multiplier(data, |kx, ky| (-0.5 * e2 * (kx * kx + ky * ky)).exp())
            }
            Operator::Sparse { offsets, cols, vals } => (0..data.len())
                .into_par_iter()
                .map(|r| {
                    let (a, b) = (offsets[r], offsets[r + 1]);
                    cols[a..b].iter().zip(&vals[a..b]).map(|(&c, v)| v * data[c as usize]).sum()
                })
                .collect(),
        }
    }

    /// Mollify every component of a field.
    pub fn apply<F: Field>(&self, f: &F) -> Result<F> {
        if !self.grid.compatible(f.grid()) {
            return Err(SgError::Config("mollifier and field live on different grids".into()));
        }
        Ok(f.map_components(|c| self.apply_data(c)))
    }
}

/// Mirror images of a point that can lie within `eps` of the domain.
fn images(grid: &Grid, x: f64, y: f64, eps: f64) -> Vec<(f64, f64)> {
    let l = grid.domain().extent;
    match grid.kind() {
        DomainKind::Square => {
            let axis = |v: f64| {
                let mut out = vec![v];
                if v < eps {
                    out.push(-v);
                }
                if l - v < eps {
                    out.push(2.0 * l - v);
                }
                out
            };
            let ys = axis(y);
            axis(x).into_iter().flat_map(|a| ys.iter().map(move |&b| (a, b))).collect()
        }
        DomainKind::Disk => {
            let r = x.hypot(y);
            let mut out = vec![(x, y)];
            if l - r < eps && r > 0.0 {
                let s = (2.0 * l - r) / r;
                out.push((s * x, s * y));
            }
            out
        }
        DomainKind::Torus => vec![(x, y)],
    }
}

/// Normalised bump weights for target node `t`. Reflection is an isometric
/// involution, so the distance from a reflected source to the target equals
/// the distance from the source to the reflected target.
fn bump_row(grid: &Grid, eps: f64, t: usize) -> Vec<(u32, f64)> {
    let (tx, ty) = grid.coords(t);
    let n = grid.n();
    let inv = 1.0 / (eps * eps);
    let w = grid.weights();
    let mut acc: Vec<(u32, f64)> = Vec::new();
    for (px, py) in images(grid, tx, ty, eps) {
        let mut push = |k: usize| {
            let (sx, sy) = grid.coords(k);
            let d2 = ((sx - px).powi(2) + (sy - py).powi(2)) * inv;
            let b = bump(d2);
            if b > 0.0 {
                acc.push((k as u32, b * w[k]));
            }
        };
        match grid.kind() {
            DomainKind::Square => {
                let h = grid.h0();
                let lo = |v: f64| (((v - eps) / h - 0.5).floor().max(0.0)) as usize;
                let hi = |v: f64| ((((v + eps) / h - 0.5).ceil()).max(0.0) as usize).min(n - 1);
                for i in lo(px)..=hi(px) {
                    for j in lo(py)..=hi(py) {
                        push(grid.index(i, j));
                    }
                }
            }
            DomainKind::Disk => {
                let h = grid.h0();
                let rp = px.hypot(py);
                let lo = (((rp - eps) / h - 0.5).floor().max(0.0)) as usize;
                let hi = ((((rp + eps) / h - 0.5).ceil()).max(0.0) as usize).min(n - 1);
                for i in lo..=hi {
                    for j in 0..n {
                        push(grid.index(i, j));
                    }
                }
            }
            DomainKind::Torus => unreachable!("torus mollification is spectral"),
        }
    }
    acc.sort_by_key(|e| e.0);
    let mut merged: Vec<(u32, f64)> = Vec::with_capacity(acc.len());
    for (c, v) in acc {
        match merged.last_mut() {
            Some(last) if last.0 == c => last.1 += v,
            _ => merged.push((c, v)),
        }
    }
    let total: f64 = merged.iter().map(|e| e.1).sum();
    if total > 0.0 {
        for e in &mut merged {
            e.1 /= total;
        }
    } else {
        merged = vec![(t as u32, 1.0)];
    }
    merged
}

/// `𝔦_ε f` for a one-off application. Prefer [`MollifierPlan`] when
/// mollifying repeatedly on a bounded domain.
pub fn mollify<F: Field>(field: &F, m: &Mollifier) -> Result<F> {
    m.plan(field.grid()).apply(field)
}

/// `‖∇(𝔦_ε f) − 𝔦_ε(∇f)‖_{L²}`, which vanishes to roundoff on the torus.
pub fn mollify_commutator_check(f: &ScalarField, m: &Mollifier) -> Result<f64> {
    let grid = f.grid();
    if grid.kind() != DomainKind::Torus {
        return Err(SgError::UnsupportedDomain { op: "mollify_commutator_check", domain: grid.kind().name() });
    }
    let plan = m.plan(grid);
    let a: VectorField = crate::grid::ops::gradient(&plan.apply(f)?)?;
    let b = plan.apply(&crate::grid::ops::gradient(f)?)?;
    Ok(l2_norm(&a.lin_comb(1.0, &b, -1.0)))
}
