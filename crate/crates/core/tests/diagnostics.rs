use proptest::prelude::*;
use sg_core::diagnostics::{
    elliptic_estimate_ratio, fit_horizon_constant, horizon_estimate, mu_lipschitz, theta, theta_exponent,
    theta_max_monotone, verify_elliptic_estimate, verify_energy_estimate, verify_recursive_bound,
    verify_theta_growth, DiagnosticsRecord, CSV_HEADER,
};
use sg_core::SgError;

fn record(t: f64, hk: f64, mu: f64, psi_hk: f64) -> DiagnosticsRecord {
    let th = theta(hk, mu, 4).unwrap();
    DiagnosticsRecord {
        t,
        l2_energy: 0.0,
        hk_norm: hk,
        mu,
        theta: th,
        theta_max: th,
        psi_hk_norm: psi_hk,
        alpha1: 0.0,
        alpha2: 0.0,
        curl_residual: 0.0,
        solver_iters: 1,
        lambda: 0.5,
        coeff_norm: 3.0,
        flux_hk_norm: 2.0,
        psi_h3_norm: None,
        p_h4_norm: None,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    /// The extremal recursion never exceeds the closed-form bound while it
    /// is finite.
    #[test]
    fn recursive_bound_holds(c in 0.0..10.0f64, n in 1usize..200, frac in 0.0..=1.0f64) {
        let x0 = if c > 0.0 { frac / (c * n as f64) } else { frac };
        let xs = verify_recursive_bound(x0, c, n).unwrap();
        prop_assert_eq!(xs.len(), n);
        for (i, x) in xs.iter().enumerate() {
            prop_assert!(*x >= x0);
            prop_assert!(*x <= x0 / (1.0 - c * i as f64 * x0) * (1.0 + 1e-12 * (i + 1) as f64));
        }
    }

    #[test]
    fn estimate_ratio_matches_direct_formula(
        psi in 1e-3..10.0f64, lambda in 0.2..1.0f64, m in 0.5..3.0f64, f in 1e-3..10.0f64, k in 1u32..4,
    ) {
        let e = (k * (k + 1)) as i32;
        let direct = psi / (lambda.powi(-e - 1) * m.powi(e) * f);
        let r = elliptic_estimate_ratio(psi, lambda, m, f, k);
        prop_assert!((r - direct).abs() <= 1e-10 * direct);
    }

    #[test]
    fn theta_is_monotone_in_both_arguments(hk in 0.0..10.0f64, mu in -1.0..0.99f64, dh in 0.0..1.0f64, dm in 0.0..0.009f64) {
        let base = theta(hk, mu, 4).unwrap();
        prop_assert!(base >= 1.0 || mu < 0.0);
        prop_assert!(theta(hk + dh, mu, 4).unwrap() >= base);
        prop_assert!(theta(hk, mu + dm, 4).unwrap() >= base);
    }
}

#[test]
fn recursive_bound_rejects_bad_input() {
    assert!(matches!(verify_recursive_bound(-1.0, 1.0, 3), Err(SgError::Config(_))));
    assert!(matches!(verify_recursive_bound(0.1, -1.0, 3), Err(SgError::Config(_))));
    assert!(matches!(verify_recursive_bound(0.1, 1.0, 0), Err(SgError::Config(_))));
    assert!(matches!(verify_recursive_bound(0.5, 1.0, 3), Err(SgError::Config(_))));
}

#[test]
fn riccati_solution_is_recovered() {
    let c = 2.5;
    let mut recs: Vec<_> = (0..30).map(|i| record(i as f64 * 0.01, 0.0, 0.0, 0.0)).collect();
    for r in &mut recs {
        r.theta_max = 1.0 / (1.0 - c * r.t);
    }
    assert!((verify_theta_growth(&recs).unwrap() - c).abs() < 1e-10);
    assert!(theta_max_monotone(&recs));
    recs[5].theta_max = 0.5;
    assert!(!theta_max_monotone(&recs));
}

#[test]
fn energy_estimate_fits_linear_growth() {
    // ‖∇p‖ grows at rate 2 against (h+1)·1 + h, smallest ratio at h = 0
    let recs: Vec<_> = (0..5).map(|i| record(i as f64 * 0.1, 0.2 * i as f64, 0.0, 1.0)).collect();
    let c = verify_energy_estimate(&recs).unwrap();
    assert!((c - 2.0).abs() < 1e-12, "{c}");
    assert!(matches!(verify_energy_estimate(&recs[..1]), Err(SgError::Config(_))));
}

#[test]
fn mu_lipschitz_and_elliptic_history() {
    let recs: Vec<_> = (0..4).map(|i| record(i as f64 * 0.5, 1.0, 0.1 * i as f64, 1.0)).collect();
    assert!((mu_lipschitz(&recs) - 0.2).abs() < 1e-12);
    let expected = elliptic_estimate_ratio(1.0, 0.5, 3.0, 2.0, 4);
    assert_eq!(verify_elliptic_estimate(&recs, 4), expected);
    assert_eq!(elliptic_estimate_ratio(0.0, 0.5, 3.0, 2.0, 4), 0.0);
}

#[test]
fn horizon_and_theta_are_reciprocal() {
    for (hk, mu) in [(0.0, 0.0), (1.0, 0.5), (3.0, 0.2)] {
        let t = horizon_estimate(hk, mu, 4, 1.0);
        assert!((t * theta(hk, mu, 4).unwrap() - 1.0).abs() < 1e-12);
        assert!((fit_horizon_constant(t, hk, mu, 4) - 1.0).abs() < 1e-12);
    }
    assert_eq!(theta_exponent(4), 22);
    assert_eq!(theta_exponent(1), 4);
}

#[test]
fn csv_row_round_trips() {
    let r = record(0.125, 1.5, 0.25, 2.0);
    let row = r.csv_row();
    let fields: Vec<&str> = row.split(',').collect();
    assert_eq!(fields.len(), CSV_HEADER.split(',').count());
    let parsed: Vec<f64> = fields.iter().map(|s| s.parse().unwrap()).collect();
    assert_eq!(parsed[0], r.t);
    assert_eq!(parsed[2], r.hk_norm);
    assert_eq!(parsed[4], r.theta);
    assert_eq!(parsed[10] as usize, r.solver_iters);
}
