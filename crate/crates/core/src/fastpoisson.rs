//! Fast approximate inverses of the discrete operator, used as
//! preconditioners.
//!
//! * torus: FFT diagonalisation of the five-point Laplacian, scaled by the
//!   mean diagonal coefficient;
//! * square and disk: exact eigenbasis along axis 1 (sine, cosine or real
//!   Fourier), then one tridiagonal solve per mode along axis 0 with
//!   coefficients averaged over axis 1.
//!
//! For the constant-coefficient Poisson problem both are exact inverses.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;

use crate::grid::Grid;

/// Boundary treatment along axis 1 for the separable solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Axis1Basis {
    Dirichlet,
    Neumann,
    Periodic,
}

/// Orthonormal eigenvectors (row `k` is `v_k`) and eigenvalues of the
/// unit-weight one-dimensional operator along axis 1.
fn axis1_eigen(n: usize, kind: Axis1Basis) -> (Vec<f64>, Vec<f64>) {
    let mut v = vec![0.0; n * n];
    let mut lam = vec![0.0; n];
    let nf = n as f64;
    match kind {
        Axis1Basis::Dirichlet | Axis1Basis::Neumann => {
            for m in 0..n {
                let k = if kind == Axis1Basis::Dirichlet { m + 1 } else { m };
                lam[m] = 4.0 * (PI * k as f64 / (2.0 * nf)).sin().powi(2);
                let mut row: Vec<f64> = (0..n)
                    .map(|j| {
                        let t = PI * k as f64 * (j as f64 + 0.5) / nf;
                        if kind == Axis1Basis::Dirichlet {
                            t.sin()
                        } else {
                            t.cos()
                        }
                    })
                    .collect();
                let s = row.iter().map(|a| a * a).sum::<f64>().sqrt();
                row.iter_mut().for_each(|a| *a /= s);
                v[m * n..(m + 1) * n].copy_from_slice(&row);
            }
        }
        Axis1Basis::Periodic => {
            let mut slot = 0;
            let mut push = |row: Vec<f64>, l: f64, v: &mut Vec<f64>, lam: &mut Vec<f64>| {
                let s = row.iter().map(|a| a * a).sum::<f64>().sqrt();
                for (j, a) in row.iter().enumerate() {
                    v[slot * n + j] = a / s;
                }
                lam[slot] = l;
                slot += 1;
            };
            for m in 0..=n / 2 {
                let l = 4.0 * (PI * m as f64 / nf).sin().powi(2);
                let w = 2.0 * PI * m as f64 / nf;
                push((0..n).map(|j| (w * j as f64).cos()).collect(), l, &mut v, &mut lam);
                if m != 0 && 2 * m != n {
                    push((0..n).map(|j| (w * j as f64).sin()).collect(), l, &mut v, &mut lam);
                }
            }
            debug_assert_eq!(slot, n);
        }
    }
    (v, lam)
}

/// Pre-factored tridiagonal system (Thomas algorithm).
#[derive(Debug, Clone)]
pub(crate) struct Tridiagonal {
    sub: Vec<f64>,
    cp: Vec<f64>,
    denom: Vec<f64>,
    pinned: bool,
}

impl Tridiagonal {
    fn new(sub: &[f64], diag: &[f64], sup: &[f64], pin: bool) -> Self {
        let n = diag.len();
        let mut sub = sub.to_vec();
        let mut diag = diag.to_vec();
        let mut sup = sup.to_vec();
        if pin {
            diag[0] = 1.0;
            sup[0] = 0.0;
            sub[0] = 0.0;
        }
        let mut cp = vec![0.0; n];
        let mut denom = vec![0.0; n];
        denom[0] = diag[0];
        cp[0] = sup[0] / denom[0];
        for i in 1..n {
            denom[i] = diag[i] - sub[i] * cp[i - 1];
            cp[i] = sup[i] / denom[i];
        }
        Self { sub, cp, denom, pinned: pin }
    }

    fn solve(&self, d: &mut [f64]) {
        let n = d.len();
        if self.pinned {
            d[0] = 0.0;
        }
        d[0] /= self.denom[0];
        for i in 1..n {
            d[i] = (d[i] - self.sub[i] * d[i - 1]) / self.denom[i];
        }
        for i in (0..n - 1).rev() {
            d[i] -= self.cp[i] * d[i + 1];
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) enum FastPoisson {
    Spectral { grid: Arc<Grid>, inv: Vec<f64> },
    Separable { n: usize, basis: Vec<f64>, modes: Vec<Tridiagonal> },
}

impl FastPoisson {
    /// Torus preconditioner for `scale · (−Δ_h) h²`.
    pub(crate) fn spectral(grid: &Arc<Grid>, scale: f64) -> Self {
        let n = grid.n();
        let s: Vec<f64> = (0..n).map(|m| 4.0 * (PI * m as f64 / n as f64).sin().powi(2)).collect();
        let mut inv = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let l = s[i] + s[j];
                inv[i * n + j] = if l > 0.0 { 1.0 / (scale * l) } else { 0.0 };
            }
        }
        FastPoisson::Spectral { grid: grid.clone(), inv }
    }

    /// Separable preconditioner: for axis-1 mode `k` the axis-0 operator is
    /// `base + λ_k · diag(shift)`. `singular` pins the first unknown of the
    /// `λ = 0` mode.
    pub(crate) fn separable(
        basis: Axis1Basis,
        base: (&[f64], &[f64], &[f64]),
        shift: &[f64],
        singular: bool,
    ) -> Self {
        let n = shift.len();
        let (v, lam) = axis1_eigen(n, basis);
        let modes = lam
            .iter()
            .map(|&l| {
                let diag: Vec<f64> = base.1.iter().zip(shift).map(|(d, s)| d + l * s).collect();
                Tridiagonal::new(base.0, &diag, base.2, singular && l == 0.0)
            })
            .collect();
        FastPoisson::Separable { n, basis: v, modes }
    }

    pub(crate) fn apply(&self, r: &[f64]) -> Vec<f64> {
        match self {
            FastPoisson::Spectral { grid, inv } => {
                let sp = grid.spectral().expect("torus grids carry spectral plans");
                let mut spec = sp.forward(r);
                for (c, m) in spec.iter_mut().zip(inv) {
                    *c *= m;
                }
                sp.inverse(spec)
            }
            FastPoisson::Separable { n, basis, modes } => {
                let n = *n;
                // coefficients along axis 1: hat[i * n + k]
                let mut hat = vec![0.0; n * n];
                hat.par_chunks_mut(n).enumerate().for_each(|(i, out)| {
                    let row = &r[i * n..(i + 1) * n];
                    for (k, o) in out.iter_mut().enumerate() {
                        *o = basis[k * n..(k + 1) * n].iter().zip(row).map(|(a, b)| a * b).sum();
                    }
                });
                let cols: Vec<Vec<f64>> = (0..n)
                    .into_par_iter()
                    .map(|k| {
                        let mut col: Vec<f64> = (0..n).map(|i| hat[i * n + k]).collect();
                        modes[k].solve(&mut col);
                        col
                    })
                    .collect();
                let mut out = vec![0.0; n * n];
                out.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
                    for k in 0..n {
                        let c = cols[k][i];
                        for (o, b) in row.iter_mut().zip(&basis[k * n..(k + 1) * n]) {
                            *o += c * b;
                        }
                    }
                });
                out
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_eigen(n: usize, kind: Axis1Basis) {
        let (v, lam) = axis1_eigen(n, kind);
        for k in 0..n {
            let row = &v[k * n..(k + 1) * n];
            for j in 0..n {
                let left = if j == 0 {
                    match kind {
                        Axis1Basis::Dirichlet => -row[0],
                        Axis1Basis::Neumann => row[0],
                        Axis1Basis::Periodic => row[n - 1],
                    }
                } else {
                    row[j - 1]
                };
                let right = if j == n - 1 {
                    match kind {
                        Axis1Basis::Dirichlet => -row[n - 1],
                        Axis1Basis::Neumann => row[n - 1],
                        Axis1Basis::Periodic => row[0],
                    }
                } else {
                    row[j + 1]
                };
                let t = 2.0 * row[j] - left - right;
                assert!((t - lam[k] * row[j]).abs() < 1e-12, "{kind:?} k={k} j={j}");
            }
            for m in 0..n {
                let d: f64 = row.iter().zip(&v[m * n..(m + 1) * n]).map(|(a, b)| a * b).sum();
                assert!((d - if m == k { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn axis_bases_are_orthonormal_eigenvectors() {
        for kind in [Axis1Basis::Dirichlet, Axis1Basis::Neumann, Axis1Basis::Periodic] {
            check_eigen(12, kind);
        }
    }

    #[test]
    fn thomas_matches_dense_solve() {
        let sub = [0.0, -1.0, -1.0, -1.0];
        let diag = [3.0, 2.5, 2.0, 3.0];
        let sup = [-1.0, -1.0, -0.5, 0.0];
        let t = Tridiagonal::new(&sub, &diag, &sup, false);
        let mut d = [1.0, 2.0, 3.0, 4.0];
        t.solve(&mut d);
        for i in 0..4 {
            let mut s = diag[i] * d[i];
            if i > 0 {
                s += sub[i] * d[i - 1];
            }
            if i < 3 {
                s += sup[i] * d[i + 1];
            }
            assert!((s - (i + 1) as f64).abs() < 1e-12);
        }
    }
}
