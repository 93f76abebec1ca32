//! Two-dimensional FFT machinery for the periodic backend.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

/// FFT plans and wavenumber tables for an `n × n` periodic grid of side `extent`.
pub struct Spectral {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// Physical wavenumber per index, Nyquist mode set to zero (derivative use).
    k_deriv: Vec<f64>,
    /// Physical wavenumber per index, Nyquist mode kept (multiplier use).
    k_full: Vec<f64>,
}

impl fmt::Debug for Spectral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Spectral").field("n", &self.n).finish()
    }
}

impl Spectral {
    pub fn new(n: usize, extent: f64) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let base = 2.0 * PI / extent;
        let mut k_deriv = Vec::with_capacity(n);
        let mut k_full = Vec::with_capacity(n);
        for m in 0..n {
            let signed = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
            k_full.push(base * signed);
            if n % 2 == 0 && m == n / 2 {
                k_deriv.push(0.0);
            } else {
                k_deriv.push(base * signed);
            }
        }
        Self {
            n,
            forward,
            inverse,
            k_deriv,
            k_full,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Derivative wavenumbers along one axis (Nyquist zeroed).
    pub fn k_deriv(&self) -> &[f64] {
        &self.k_deriv
    }

    /// Full wavenumbers along one axis.
    pub fn k_full(&self) -> &[f64] {
        &self.k_full
    }

    /// Unnormalised forward transform of real data laid out `[i * n + j]`.
    pub fn forward(&self, data: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut buf, &self.forward);
        buf
    }

    /// Inverse transform (normalised) returning the real part.
    pub fn inverse(&self, mut spec: Vec<Complex64>) -> Vec<f64> {
        self.transform(&mut spec, &self.inverse);
        let scale = 1.0 / (self.n * self.n) as f64;
        spec.into_iter().map(|c| c.re * scale).collect()
    }

    fn transform(&self, buf: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        buf.par_chunks_mut(n).for_each(|row| plan.process(row));
        let mut t = transpose(buf, n);
        t.par_chunks_mut(n).for_each(|row| plan.process(row));
        let back = transpose(&t, n);
        buf.copy_from_slice(&back);
    }

    /// Apply a real multiplier `m(kx, ky)` (full wavenumbers) to real data.
    pub fn apply_multiplier<F>(&self, data: &[f64], m: F) -> Vec<f64>
    where
        F: Fn(f64, f64) -> f64,
    {
        let mut spec = self.forward(data);
        self.scale_full(&mut spec, m);
        self.inverse(spec)
    }

    pub fn scale_full<F>(&self, spec: &mut [Complex64], m: F)
    where
        F: Fn(f64, f64) -> f64,
    {
        let n = self.n;
        for i in 0..n {
            let kx = self.k_full[i];
            for j in 0..n {
                spec[i * n + j] *= m(kx, self.k_full[j]);
            }
        }
    }

    /// Multiply a spectrum by `i·k_axis` (axis 0 is x, axis 1 is y).
    pub fn derivative_spectrum(&self, spec: &[Complex64], axis: usize) -> Vec<Complex64> {
        let n = self.n;
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                let k = if axis == 0 { self.k_deriv[i] } else { self.k_deriv[j] };
                out[i * n + j] = spec[i * n + j] * Complex64::new(0.0, k);
            }
        }
        out
    }

    /// Both first partial derivatives of real data.
    pub fn partials(&self, data: &[f64]) -> [Vec<f64>; 2] {
        let spec = self.forward(data);
        let dx = self.inverse(self.derivative_spectrum(&spec, 0));
        let dy = self.inverse(self.derivative_spectrum(&spec, 1));
        [dx, dy]
    }
}

fn transpose(buf: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    const B: usize = 32;
    for ib in (0..n).step_by(B) {
        for jb in (0..n).step_by(B) {
            for i in ib..(ib + B).min(n) {
                for j in jb..(jb + B).min(n) {
                    out[j * n + i] = buf[i * n + j];
                }
            }
        }
    }
    out
}
