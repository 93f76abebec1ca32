//! Logically rectangular node sets for the three backends.
//!
//! Nodes are addressed by `(i, j)` with storage index `i * n + j`. Axis 0 is
//! `x` (torus, square) or the radius (disk); axis 1 is `y` or the polar angle.
//!
//! * torus: `x_i = i h`, periodic in both axes, `h = L / n`;
//! * square: cell-centred `x_i = (i + ½) h` on `[0, L]`, `h = L / n`;
//! * disk: `r_i = (i + ½) h_r`, `θ_j = 2π j / n`; the pole is staggered so no
//!   node sits on it, and the neighbour of ring 0 across the pole is ring 0
//!   rotated by π.

use std::f64::consts::PI;
use std::sync::Arc;

use super::domain::{DomainKind, DomainSpec};
use super::spectral::Spectral;
use crate::error::{Result, SgError};

/// Smallest supported resolution.
pub const MIN_RESOLUTION: usize = 8;

#[derive(Debug)]
pub struct Grid {
    domain: DomainSpec,
    n: usize,
    /// Spacing along axis 0 (`h` or `h_r`).
    h0: f64,
    /// Spacing along axis 1 (`h` or `h_θ`).
    h1: f64,
    x: Vec<f64>,
    y: Vec<f64>,
    /// Cell areas used as quadrature weights.
    weight: Vec<f64>,
    cos_t: Vec<f64>,
    sin_t: Vec<f64>,
    conformal: Vec<f64>,
    conformal_grad: [Vec<f64>; 2],
    coriolis: Vec<f64>,
    coriolis_grad: [Vec<f64>; 2],
    spectral: Option<Spectral>,
}

impl Grid {
    /// Build an `n × n` grid over `domain`, sampling both potentials.
    pub fn new(domain: DomainSpec, n: usize) -> Result<Arc<Grid>> {
        if n < MIN_RESOLUTION {
            return Err(SgError::Config(format!(
                "grid resolution {n} is below the minimum {MIN_RESOLUTION}"
            )));
        }
        if !(domain.extent.is_finite() && domain.extent > 0.0) {
            return Err(SgError::Config(format!("domain extent must be positive, got {}", domain.extent)));
        }
        if domain.kind == DomainKind::Disk && n % 2 != 0 {
            return Err(SgError::Config("disk grids need an even resolution (pole parity)".into()));
        }
        let nn = n * n;
        let (h0, h1) = match domain.kind {
            DomainKind::Torus | DomainKind::Square => {
                let h = domain.extent / n as f64;
                (h, h)
            }
            DomainKind::Disk => (domain.extent / n as f64, 2.0 * PI / n as f64),
        };
        let mut x = vec![0.0; nn];
        let mut y = vec![0.0; nn];
        let mut weight = vec![0.0; nn];
        let mut cos_t = vec![1.0; n];
        let mut sin_t = vec![0.0; n];
        if domain.kind == DomainKind::Disk {
            for j in 0..n {
                let t = j as f64 * h1;
                cos_t[j] = t.cos();
                sin_t[j] = t.sin();
            }
        }
        for i in 0..n {
            for j in 0..n {
                let k = i * n + j;
                match domain.kind {
                    DomainKind::Torus => {
                        x[k] = i as f64 * h0;
                        y[k] = j as f64 * h1;
                        weight[k] = h0 * h1;
                    }
                    DomainKind::Square => {
                        x[k] = (i as f64 + 0.5) * h0;
                        y[k] = (j as f64 + 0.5) * h1;
                        weight[k] = h0 * h1;
                    }
                    DomainKind::Disk => {
                        let r = (i as f64 + 0.5) * h0;
                        x[k] = r * cos_t[j];
                        y[k] = r * sin_t[j];
                        weight[k] = r * h0 * h1;
                    }
                }
            }
        }
        let sample = |f: &super::domain::ScalarFn| -> (Vec<f64>, [Vec<f64>; 2]) {
            let mut v = vec![0.0; nn];
            let mut gx = vec![0.0; nn];
            let mut gy = vec![0.0; nn];
            for k in 0..nn {
                v[k] = f.value(x[k], y[k]);
                let g = f.gradient(x[k], y[k]);
                gx[k] = g[0];
                gy[k] = g[1];
            }
            (v, [gx, gy])
        };
        let (conformal, conformal_grad) = sample(&domain.conformal);
        let (coriolis, coriolis_grad) = sample(&domain.coriolis);
        if let Some(k) = coriolis.iter().position(|v| !v.is_finite()) {
            return Err(SgError::Config(format!(
                "Coriolis parameter e^(-phi) vanishes or is undefined at ({:.4}, {:.4})",
                x[k], y[k]
            )));
        }
        if conformal.iter().chain(conformal_grad.iter().flatten()).chain(coriolis_grad.iter().flatten()).any(|v| !v.is_finite())
        {
            return Err(SgError::Config("potentials are not finite on the grid".into()));
        }
        let spectral = (domain.kind == DomainKind::Torus).then(|| Spectral::new(n, domain.extent));
        Ok(Arc::new(Grid {
            domain,
            n,
            h0,
            h1,
            x,
            y,
            weight,
            cos_t,
            sin_t,
            conformal,
            conformal_grad,
            coriolis,
            coriolis_grad,
            spectral,
        }))
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn kind(&self) -> DomainKind {
        self.domain.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn h0(&self) -> f64 {
        self.h0
    }

    pub fn h1(&self) -> f64 {
        self.h1
    }

    /// Characteristic mesh width (`h` or `h_r`).
    pub fn h(&self) -> f64 {
        self.h0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n + j
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn coords(&self, k: usize) -> (f64, f64) {
        (self.x[k], self.y[k])
    }

    pub fn weights(&self) -> &[f64] {
        &self.weight
    }

    pub fn area(&self) -> f64 {
        self.weight.iter().sum()
    }

    /// Radius of ring `i` (disk only).
    pub fn radius(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.h0
    }

    pub fn cos_theta(&self) -> &[f64] {
        &self.cos_t
    }

    pub fn sin_theta(&self) -> &[f64] {
        &self.sin_t
    }

    /// `V` at the nodes.
    pub fn conformal(&self) -> &[f64] {
        &self.conformal
    }

    pub fn conformal_grad(&self) -> &[Vec<f64>; 2] {
        &self.conformal_grad
    }

    /// `φ` at the nodes.
    pub fn coriolis(&self) -> &[f64] {
        &self.coriolis
    }

    pub fn coriolis_grad(&self) -> &[Vec<f64>; 2] {
        &self.coriolis_grad
    }

    pub fn spectral(&self) -> Option<&Spectral> {
        self.spectral.as_ref()
    }

    /// True when both grids describe the same nodes.
    pub fn compatible(&self, other: &Grid) -> bool {
        std::ptr::eq(self, other) || (self.n == other.n && self.domain.same_geometry(&other.domain))
    }

    /// Derivative along axis 0 by second-order finite differences.
    pub(crate) fn fd_axis0(&self, f: &[f64]) -> Vec<f64> {
        let n = self.n;
        let h = self.h0;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let k = i * n + j;
                out[k] = match self.domain.kind {
                    DomainKind::Torus => {
                        let ip = (i + 1) % n;
                        let im = (i + n - 1) % n;
                        (f[ip * n + j] - f[im * n + j]) / (2.0 * h)
                    }
                    DomainKind::Square | DomainKind::Disk => {
                        if i == 0 {
                            if self.domain.kind == DomainKind::Disk {
                                // across the pole: r = -h/2 at angle θ is ring 0 at θ + π
                                let jo = (j + n / 2) % n;
                                (f[n + j] - f[jo]) / (2.0 * h)
                            } else {
                                (-3.0 * f[j] + 4.0 * f[n + j] - f[2 * n + j]) / (2.0 * h)
                            }
                        } else if i == n - 1 {
                            (3.0 * f[k] - 4.0 * f[k - n] + f[k - 2 * n]) / (2.0 * h)
                        } else {
                            (f[k + n] - f[k - n]) / (2.0 * h)
                        }
                    }
                };
            }
        }
        out
    }

    /// Derivative along axis 1 (for the disk this is `∂_θ`, not divided by `r`).
    pub(crate) fn fd_axis1(&self, f: &[f64]) -> Vec<f64> {
        let n = self.n;
        let h = self.h1;
        let periodic = self.domain.kind != DomainKind::Square;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            let row = &f[i * n..(i + 1) * n];
            let o = &mut out[i * n..(i + 1) * n];
            for j in 0..n {
                o[j] = if periodic {
                    (row[(j + 1) % n] - row[(j + n - 1) % n]) / (2.0 * h)
                } else if j == 0 {
                    (-3.0 * row[0] + 4.0 * row[1] - row[2]) / (2.0 * h)
                } else if j == n - 1 {
                    (3.0 * row[j] - 4.0 * row[j - 1] + row[j - 2]) / (2.0 * h)
                } else {
                    (row[j + 1] - row[j - 1]) / (2.0 * h)
                };
            }
        }
        out
    }

    /// Cartesian partial derivatives `(∂_x f, ∂_y f)` of nodal data.
    pub(crate) fn partials(&self, f: &[f64]) -> [Vec<f64>; 2] {
        match self.domain.kind {
            DomainKind::Torus => self.spectral.as_ref().expect("torus grids carry spectral plans").partials(f),
            DomainKind::Square => [self.fd_axis0(f), self.fd_axis1(f)],
            DomainKind::Disk => {
                let dr = self.fd_axis0(f);
                let dt = self.fd_axis1(f);
                let n = self.n;
                let mut dx = vec![0.0; n * n];
                let mut dy = vec![0.0; n * n];
                for i in 0..n {
                    let r = self.radius(i);
                    for j in 0..n {
                        let k = i * n + j;
                        let (c, s) = (self.cos_t[j], self.sin_t[j]);
                        dx[k] = c * dr[k] - s * dt[k] / r;
                        dy[k] = s * dr[k] + c * dt[k] / r;
                    }
                }
                [dx, dy]
            }
        }
    }
}
