//! Sixth-order derivatives for norm evaluation on bounded domains.
//!
//! Iterating the solver's second-order differences `k` times amplifies the
//! one-sided boundary closures (and, on the disk, the `1/r` factor near the
//! pole) by `h^{-k+1}`, so `H^k` norms with `k ≥ 3` stop converging. Norms use
//! seven-point stencils instead (one-sided near walls, reflected across the
//! pole) and exact Fourier differentiation along the disk's angle.

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::domain::DomainKind;
use super::mesh::Grid;

const WIDTH: usize = 7;

/// Finite-difference weights for the `m`-th derivative at zero on the given
/// node offsets (Fornberg's recursion).
pub(crate) fn fornberg(offsets: &[f64], m: usize) -> Vec<f64> {
    let n = offsets.len();
    let mut c = vec![vec![0.0; m + 1]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = offsets[0];
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = offsets[i];
        for j in 0..i {
            let c3 = offsets[i] - offsets[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|row| row[m]).collect()
}

/// Per-row stencils `(first row, weights)` of the first derivative along an
/// axis of `n` nodes with spacing `h`. With `reflect_low`, rows `-1, -2, …`
/// exist (the disk's reflection across the pole).
fn stencils(n: usize, h: f64, reflect_low: bool) -> Vec<(isize, Vec<f64>)> {
    let half = (WIDTH / 2) as isize;
    let lowest = if reflect_low { -half } else { 0 };
    let highest = n as isize - WIDTH as isize;
    (0..n as isize)
        .map(|i| {
            let start = (i - half).max(lowest).min(highest);
            let offsets: Vec<f64> = (0..WIDTH as isize).map(|o| (start + o - i) as f64).collect();
            let w = fornberg(&offsets, 1).into_iter().map(|v| v / h).collect();
            (start, w)
        })
        .collect()
}

fn axis0(grid: &Grid, f: &[f64], reflect: bool) -> Vec<f64> {
    let n = grid.n();
    let st = stencils(n, grid.h0(), reflect);
    let mut out = vec![0.0; n * n];
    for (i, (start, w)) in st.iter().enumerate() {
        for j in 0..n {
            let mut s = 0.0;
            for (o, wo) in w.iter().enumerate() {
                let r = start + o as isize;
                let v = if r >= 0 {
                    f[r as usize * n + j]
                } else {
                    // ring -r-1 seen from the opposite side of the pole
                    f[(-r - 1) as usize * n + (j + n / 2) % n]
                };
                s += wo * v;
            }
            out[i * n + j] = s;
        }
    }
    out
}

fn axis1_open(grid: &Grid, f: &[f64]) -> Vec<f64> {
    let n = grid.n();
    let st = stencils(n, grid.h1(), false);
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        let row = &f[i * n..(i + 1) * n];
        for (j, (start, w)) in st.iter().enumerate() {
            out[i * n + j] = w.iter().enumerate().map(|(o, wo)| wo * row[*start as usize + o]).sum();
        }
    }
    out
}

/// `∂_θ` of every ring by FFT (Nyquist mode dropped).
fn angular_spectral(grid: &Grid, f: &[f64]) -> Vec<f64> {
    let n = grid.n();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut out = vec![0.0; n * n];
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        for (b, v) in buf.iter_mut().zip(&f[i * n..(i + 1) * n]) {
            *b = Complex64::new(*v, 0.0);
        }
        fwd.process(&mut buf);
        for (m, b) in buf.iter_mut().enumerate() {
            let k = if 2 * m == n {
                0.0
            } else if m < n / 2 + 1 {
                m as f64
            } else {
                m as f64 - n as f64
            };
            *b *= Complex64::new(0.0, k / n as f64);
        }
        inv.process(&mut buf);
        for (o, b) in out[i * n..(i + 1) * n].iter_mut().zip(&buf) {
            *o = b.re;
        }
    }
    out
}

/// High-order Cartesian partials on the square and the disk.
pub(crate) fn partials(grid: &Grid, f: &[f64]) -> [Vec<f64>; 2] {
    match grid.kind() {
        DomainKind::Torus => grid.partials(f),
        DomainKind::Square => [axis0(grid, f, false), axis1_open(grid, f)],
        DomainKind::Disk => {
            let n = grid.n();
            let dr = axis0(grid, f, true);
            let dt = angular_spectral(grid, f);
            let (c, s) = (grid.cos_theta(), grid.sin_theta());
            let mut dx = vec![0.0; n * n];
            let mut dy = vec![0.0; n * n];
            for i in 0..n {
                let r = grid.radius(i);
                for j in 0..n {
                    let k = i * n + j;
                    dx[k] = c[j] * dr[k] - s[j] * dt[k] / r;
                    dy[k] = s[j] * dr[k] + c[j] * dt[k] / r;
                }
            }
            [dx, dy]
        }
    }
}
