//! Discrete inner products, `L²` and `H^k` norms.
//!
//! Quadrature is the cell-area-weighted nodal sum. On the torus the `H^k`
//! norm is evaluated in Fourier space with the same (Nyquist-free)
//! derivative symbols used by the operators, so it matches iterated
//! spectral differentiation up to roundoff. Square and disk norms iterate
//! sixth-order partials (see `highorder`).

use super::domain::DomainKind;
use super::field::Field;
use super::mesh::Grid;
use crate::error::{Result, SgError};

/// Weighted `⟨a, b⟩`, summed over components.
pub fn inner<F: Field>(a: &F, b: &F) -> f64 {
    let w = a.grid().weights();
    a.components()
        .into_iter()
        .zip(b.components())
        .map(|(p, q)| p.iter().zip(q).zip(w).map(|((u, v), w)| u * v * w).sum::<f64>())
        .sum()
}

pub fn l2_norm<F: Field>(f: &F) -> f64 {
    inner(f, f).sqrt()
}

/// Smallest resolution on which an order-`k` norm is accepted.
pub fn min_resolution_for_order(k: u32) -> usize {
    2 * k as usize + 4
}

/// `sqrt(Σ_{|α|≤k} ‖D^α f‖²)` with every multi-index counted once.
pub fn sobolev_norm<F: Field>(f: &F, k: u32) -> Result<f64> {
    let grid = f.grid();
    if grid.n() < min_resolution_for_order(k) {
        return Err(SgError::Config(format!(
            "Sobolev order {k} needs resolution >= {}, grid has {}",
            min_resolution_for_order(k),
            grid.n()
        )));
    }
    let mut total = 0.0;
    for comp in f.components() {
        total += match grid.kind() {
            DomainKind::Torus => spectral_sq(grid, comp, k),
            _ => difference_sq(grid, comp, k),
        };
    }
    Ok(total.sqrt())
}

fn spectral_sq(grid: &Grid, data: &[f64], k: u32) -> f64 {
    let sp = grid.spectral().expect("torus grids carry spectral plans");
    let n = grid.n();
    let spec = sp.forward(data);
    let kd = sp.k_deriv();
    let scale = grid.h0() * grid.h1() / (n * n) as f64;
    let mut sum = 0.0;
    for i in 0..n {
        let kx2 = kd[i] * kd[i];
        for j in 0..n {
            let ky2 = kd[j] * kd[j];
            // Σ_{a+b≤k} kx^{2a} ky^{2b}
            let mut symbol = 0.0;
            let mut pa = 1.0;
            for a in 0..=k {
                let mut pb = 1.0;
                for _ in 0..=(k - a) {
                    symbol += pa * pb;
                    pb *= ky2;
                }
                pa *= kx2;
            }
            sum += spec[i * n + j].norm_sqr() * symbol;
        }
    }
    sum * scale
}

fn difference_sq(grid: &Grid, data: &[f64], k: u32) -> f64 {
    let w = grid.weights();
    let sq = |v: &[f64]| v.iter().zip(w).map(|(a, w)| a * a * w).sum::<f64>();
    // level[b] holds ∂x^{l-b} ∂y^b f
    let mut level = vec![data.to_vec()];
    let mut sum = sq(data);
    for _ in 0..k {
        let mut next = Vec::with_capacity(level.len() + 1);
        let last = level.len() - 1;
        for (b, f) in level.iter().enumerate() {
            let [dx, dy] = super::highorder::partials(grid, f);
            next.push(dx);
            if b == last {
                next.push(dy);
            }
        }
        sum += next.iter().map(|f| sq(f)).sum::<f64>();
        level = next;
    }
    sum
}
