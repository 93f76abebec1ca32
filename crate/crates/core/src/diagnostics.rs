//! Monitors and empirical checks of the a-priori estimates.
//!
//! None of the constants in the estimates are known explicitly, so every
//! `verify_*` routine fits the smallest constant that makes the inequality
//! hold on the data it is given. A finite constant that is stable under grid
//! refinement is the pass criterion; the fitted values are reports, not
//! claims about the true constants.

use crate::error::{Result, SgError};

/// One row of the run history, recorded at the start of every macro-step
/// and once more at the final time.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    /// `½‖∇p‖²_{L²}`.
    pub l2_energy: f64,
    /// `‖∇p‖_{H^k}`.
    pub hk_norm: f64,
    pub mu: f64,
    pub theta: f64,
    /// Running maximum of `theta`.
    pub theta_max: f64,
    /// `‖∇ψ‖_{H^k}` of the potential frozen for the step.
    pub psi_hk_norm: f64,
    /// Harmonic residuals of the right-hand side (zero off the torus).
    pub alpha1: f64,
    pub alpha2: f64,
    /// `‖curl ∇p‖ / ‖∇p‖`.
    pub curl_residual: f64,
    pub solver_iters: usize,
    /// Ellipticity `λ` of the elliptic matrix.
    pub lambda: f64,
    /// Coefficient size `‖A‖_{H^{k-1}} + ‖div A‖_{H^{k-1}} + ‖∇⊥f‖_{H^{k-1}}`.
    pub coeff_norm: f64,
    /// `‖F‖_{H^k}` of the elliptic flux.
    pub flux_hk_norm: f64,
    /// `‖∇ψ‖_{H³}` and `‖∇p‖_{H⁴}`, recorded when `k ≥ 4`.
    pub psi_h3_norm: Option<f64>,
    pub p_h4_norm: Option<f64>,
}

/// Header of the per-step CSV.
pub const CSV_HEADER: &str =
    "t,l2_energy,hk_norm,mu,theta,theta_max,psi_hk_norm,alpha1,alpha2,curl_residual,solver_iters";

impl DiagnosticsRecord {
    /// CSV row matching [`CSV_HEADER`], floats with 17 significant digits.
    pub fn csv_row(&self) -> String {
        format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
            self.t,
            self.l2_energy,
            self.hk_norm,
            self.mu,
            self.theta,
            self.theta_max,
            self.psi_hk_norm,
            self.alpha1,
            self.alpha2,
            self.curl_residual,
            self.solver_iters
        )
    }
}

/// Exponent `k(k+1) + 2` of the `Θ` functional.
pub fn theta_exponent(k: u32) -> i32 {
    (k * (k + 1) + 2) as i32
}

/// `Θ = ((‖∇p‖_{H^k} + 1)/(1 − μ))^{k(k+1)+2}`.
pub fn theta(hk_norm: f64, mu: f64, k: u32) -> Result<f64> {
    if mu >= 1.0 {
        return Err(SgError::StabilityViolation { mu, limit: 1.0, x: f64::NAN, y: f64::NAN });
    }
    Ok(((hk_norm + 1.0) / (1.0 - mu)).powi(theta_exponent(k)))
}

/// `t* = C((1 − μ₀)/(‖∇p₀‖_{H^k} + 1))^{k(k+1)+2} = C/Θ₀`.
pub fn horizon_estimate(hk_norm0: f64, mu0: f64, k: u32, c: f64) -> f64 {
    c * ((1.0 - mu0) / (hk_norm0 + 1.0)).powi(theta_exponent(k))
}

/// Constant `C` that makes `horizon_estimate` equal to a horizon actually
/// reached. Reported only.
pub fn fit_horizon_constant(reached: f64, hk_norm0: f64, mu0: f64, k: u32) -> f64 {
    reached / horizon_estimate(hk_norm0, mu0, k, 1.0)
}

fn require_records(records: &[DiagnosticsRecord], min: usize) -> Result<()> {
    if records.len() < min {
        return Err(SgError::Config(format!("need at least {min} records, got {}", records.len())));
    }
    Ok(())
}

/// Smallest `C` with `ΔΘ̃/Δt ≤ C Θ̃_i Θ̃_{i+1}` on every interval. For
/// `Θ̃ = 1/(1 − ct)` this returns exactly `c`.
pub fn verify_theta_growth(records: &[DiagnosticsRecord]) -> Result<f64> {
    require_records(records, 10)?;
    let mut c = 0.0_f64;
    for w in records.windows(2) {
        let dt = w[1].t - w[0].t;
        let (a, b) = (w[0].theta_max, w[1].theta_max);
        if dt > 0.0 && b > a {
            c = c.max((1.0 / a - 1.0 / b) / dt);
        }
    }
    Ok(c)
}

/// Iterate the extremal recursion `x_{i+1} = x_i/(1 − c x_i)` and check
/// `x_i ≤ x₀/(1 − c i x₀)` for `i < n`, where the bound is finite.
/// Returns `x_0..x_{n-1}`.
pub fn verify_recursive_bound(x0: f64, c: f64, n: usize) -> Result<Vec<f64>> {
    if !(x0 >= 0.0 && c >= 0.0 && n >= 1) || (c > 0.0 && x0 > 1.0 / (c * n as f64)) {
        return Err(SgError::Config(format!("recursive bound needs 0 <= x0 <= 1/(cN), got x0={x0}, c={c}, N={n}")));
    }
    let mut xs = Vec::with_capacity(n);
    xs.push(x0);
    let mut x = x0;
    for i in 1..n {
        x /= 1.0 - c * x;
        let bound = x0 / (1.0 - c * i as f64 * x0);
        // floating point slack only; the exact iterates meet the bound
        if x.is_nan() || x > bound * (1.0 + 1e-12 * i as f64) {
            return Err(SgError::Numerical(format!("recursive bound violated at i={i}: {x} > {bound}")));
        }
        xs.push(x);
    }
    Ok(xs)
}

/// Smallest `C` with `d/dt‖∇p‖_{H^k} ≤ C((‖∇p‖_{H^k}+1)‖∇ψ‖_{H^k} + ‖∇p‖_{H^k})`
/// across the recorded intervals (left-endpoint values on the right).
pub fn verify_energy_estimate(records: &[DiagnosticsRecord]) -> Result<f64> {
    require_records(records, 2)?;
    let mut c = 0.0_f64;
    for w in records.windows(2) {
        let dt = w[1].t - w[0].t;
        if dt <= 0.0 {
            continue;
        }
        let rate = (w[1].hk_norm - w[0].hk_norm) / dt;
        if rate <= 0.0 {
            continue;
        }
        let rhs = (w[0].hk_norm + 1.0) * w[0].psi_hk_norm + w[0].hk_norm;
        c = c.max(if rhs > 0.0 { rate / rhs } else { f64::INFINITY });
    }
    Ok(c)
}

/// Largest observed `|μ_{t+τ} − μ_t|/τ`.
pub fn mu_lipschitz(records: &[DiagnosticsRecord]) -> f64 {
    records
        .windows(2)
        .filter(|w| w[1].t > w[0].t)
        .map(|w| (w[1].mu - w[0].mu).abs() / (w[1].t - w[0].t))
        .fold(0.0, f64::max)
}

/// Ratio `‖∇ψ‖_{H^k} / (λ^{−(k+1)k−1} M^{(k+1)k} ‖F‖_{H^k})`, evaluated in
/// logarithms because the powers are huge. Zero when `∇ψ = 0`.
pub fn elliptic_estimate_ratio(psi_hk: f64, lambda: f64, coeff_norm: f64, flux_hk: f64, k: u32) -> f64 {
    if psi_hk == 0.0 {
        return 0.0;
    }
    let e = (k * (k + 1)) as f64;
    let log_rhs = -(e + 1.0) * lambda.ln() + e * coeff_norm.ln() + flux_hk.ln();
    (psi_hk.ln() - log_rhs).exp()
}

/// Largest [`elliptic_estimate_ratio`] over a history.
pub fn verify_elliptic_estimate(records: &[DiagnosticsRecord], k: u32) -> f64 {
    records
        .iter()
        .map(|r| elliptic_estimate_ratio(r.psi_hk_norm, r.lambda, r.coeff_norm, r.flux_hk_norm, k))
        .fold(0.0, f64::max)
}

/// True when `theta_max` never decreases.
pub fn theta_max_monotone(records: &[DiagnosticsRecord]) -> bool {
    records.windows(2).all(|w| w[1].theta_max >= w[0].theta_max)
}
