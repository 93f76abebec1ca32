//! The regularised time-discrete construction.
//!
//! Each macro-step `[iτ, (i+1)τ)` freezes the velocity potential `ψ` solved
//! from the step's initial data and then integrates
//!
//! `∂_s∇p = 𝔥𝔦_ε(M ∇⊥ψ + e^{-φ}P⊥)`,  `M = e^{2V}(DP + B[P]) + e^{-2φ}I`,
//!
//! with `P = 𝔦_ε∇p`, using classical RK4. The right-hand side is affine in
//! `∇p` for frozen `ψ`, which the substep heuristic exploits.

use std::sync::Arc;

use crate::coeffs::{build_b, build_bundle, intro_stability_matrix, stability_eigenvalue, CoeffBundle};
use crate::diagnostics::{theta, DiagnosticsRecord};
use crate::elliptic::{assemble, BoundaryCondition, EllipticProblem, EllipticSolution};
use crate::error::{Result, SgError};
use crate::grid::ops::{curl, divergence_matrix, gradient, hessian, jacobian, perp, perp_gradient, potential_weight, scale_by};
use crate::grid::{l2_norm, min_resolution_for_order, sobolev_norm, DomainKind, DomainSpec, Field, Grid, MatrixField, ScalarField, VectorField};
use crate::hodge::HodgeProjector;
use crate::mollify::{Mollifier, MollifierPlan};

/// RK4 substeps per macro-step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Substeps {
    /// `max(4, ⌈τ L̂⌉)` with `L̂` a power-iteration estimate of the norm of
    /// the linear part of the right-hand side.
    Auto,
    Fixed(usize),
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub domain: DomainSpec,
    pub n: usize,
    /// Sobolev order of the monitored norms.
    pub k: u32,
    pub epsilon: f64,
    pub tau: f64,
    pub substeps: Substeps,
    pub t_final: f64,
    pub stability_margin: f64,
    pub elliptic_tol: f64,
    pub elliptic_max_iter: usize,
    pub hodge_tol: f64,
    /// Store the fields every this many steps (0: final state only).
    pub snapshot_every: usize,
}

impl SolverConfig {
    pub fn new(domain: DomainSpec, n: usize) -> Self {
        Self {
            domain,
            n,
            k: 4,
            epsilon: 0.05,
            tau: 1e-3,
            substeps: Substeps::Auto,
            t_final: 0.1,
            stability_margin: 0.02,
            elliptic_tol: 1e-10,
            elliptic_max_iter: 500,
            hodge_tol: 1e-12,
            snapshot_every: 0,
        }
    }

    /// Number of macro-steps, `t_final / τ`.
    pub fn n_steps(&self) -> usize {
        (self.t_final / self.tau).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(SgError::Config(m));
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return bad(format!("tau must be positive, got {}", self.tau));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return bad(format!("t_final must be non-negative, got {}", self.t_final));
        }
        let steps = self.t_final / self.tau;
        if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
            return bad(format!(
                "tau = {} does not divide t_final = {}; the horizon must be an integer number of macro-steps",
                self.tau, self.t_final
            ));
        }
        if !(0.0..1.0).contains(&self.stability_margin) {
            return bad(format!("stability_margin must lie in [0, 1), got {}", self.stability_margin));
        }
        if self.k == 0 {
            return bad("Sobolev order k must be at least 1".into());
        }
        let min_n = min_resolution_for_order(self.k);
        if self.n < min_n {
            return bad(format!("n = {} is too small for order k = {} (need >= {min_n})", self.n, self.k));
        }
        if !(self.elliptic_tol > 0.0 && self.hodge_tol > 0.0) {
            return bad("solver tolerances must be positive".into());
        }
        if self.elliptic_max_iter == 0 {
            return bad("elliptic_max_iter must be positive".into());
        }
        if self.substeps == Substeps::Fixed(0) {
            return bad("substeps must be positive".into());
        }
        Ok(())
    }
}

/// Stored state at the start of a macro-step.
#[derive(Debug, Clone)]
pub struct StateSnapshot {
    pub step: usize,
    pub t: f64,
    pub grad_p: VectorField,
    /// Potential frozen for the step (absent for the final state).
    pub psi: Option<ScalarField>,
    pub mu_field: Option<ScalarField>,
}

#[derive(Debug, Clone)]
pub struct RunState {
    /// Macro-step index.
    pub i: usize,
    /// Intra-step time.
    pub s: f64,
    pub grad_p: VectorField,
    /// Potential of the most recent step.
    pub psi: Option<ScalarField>,
    pub bundle: Option<CoeffBundle>,
    pub theta_max: f64,
    pub history: Vec<StateSnapshot>,
}

impl RunState {
    pub fn new(grad_p: VectorField) -> Self {
        Self { i: 0, s: 0.0, grad_p, psi: None, bundle: None, theta_max: 0.0, history: Vec::new() }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub records: Vec<DiagnosticsRecord>,
    pub snapshots: Vec<StateSnapshot>,
    pub final_grad_p: VectorField,
    pub mu0: f64,
    pub steps_completed: usize,
    /// Time the run reached (the horizon unless it halted).
    pub t_reached: f64,
    /// Why the run stopped early, if it did.
    pub halt: Option<SgError>,
}

impl RunOutcome {
    pub fn completed(&self) -> bool {
        self.halt.is_none()
    }
}

/// Data derived at the start of a step.
struct StepStart {
    bundle: CoeffBundle,
    problem: EllipticProblem,
    solution: EllipticSolution,
}

/// Operators bound to one configuration.
#[derive(Debug, Clone)]
pub struct Stepper {
    cfg: SolverConfig,
    grid: Arc<Grid>,
    mollifier: MollifierPlan,
    hodge: HodgeProjector,
    bc: BoundaryCondition,
    e2v: Vec<f64>,
    em2phi: Vec<f64>,
    emphi: Vec<f64>,
}

impl Stepper {
    pub fn new(cfg: SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let grid = Grid::new(cfg.domain.clone(), cfg.n)?;
        let mollifier = Mollifier::new(cfg.epsilon)?.plan(&grid);
        let hodge = HodgeProjector::new(&grid, cfg.hodge_tol)?;
        Ok(Self {
            bc: BoundaryCondition::natural_for(grid.kind()),
            e2v: potential_weight(&grid, 2.0, 0.0),
            em2phi: potential_weight(&grid, 0.0, -2.0),
            emphi: potential_weight(&grid, 0.0, -1.0),
            cfg,
            grid,
            mollifier,
            hodge,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn mollifier(&self) -> &MollifierPlan {
        &self.mollifier
    }

    pub fn projector(&self) -> &HodgeProjector {
        &self.hodge
    }

    /// `∇p₀` and `μ₀` from the intro form of the stability matrix at the
    /// unmollified initial data. Rejects `μ₀ ≥ 1 − margin`.
    pub fn validate_initial(&self, p0: &ScalarField) -> Result<(VectorField, f64)> {
        if !self.grid.compatible(p0.grid()) {
            return Err(SgError::Config("initial data lives on a different grid".into()));
        }
        if p0.data.iter().any(|v| !v.is_finite()) {
            return Err(SgError::Numerical("initial data is not finite".into()));
        }
        let grad = gradient(p0)?;
        let q = intro_stability_matrix(&grad, &hessian(p0)?)?;
        let (mu, field) = stability_eigenvalue(&q)?;
        let limit = 1.0 - self.cfg.stability_margin;
        if mu >= limit {
            let (x, y) = self.grid.coords(field.argmax());
            return Err(SgError::StabilityViolation { mu, limit, x, y });
        }
        Ok((grad, mu))
    }

    /// The bracket `X = M∇⊥ψ + e^{-φ}P⊥` before smoothing and projection.
    pub fn bracket(&self, grad_p: &VectorField, psi: &ScalarField) -> Result<VectorField> {
        let p = self.mollifier.apply(grad_p)?;
        let dp = jacobian(&p)?.symmetric_part();
        let (b, _, _) = build_b(&p);
        let m = scale_by(&self.e2v, &dp.lin_comb(1.0, &b, 1.0));
        let m = m.lin_comb(1.0, &scale_by(&self.em2phi, &MatrixField::identity(&self.grid)), 1.0);
        let drift = m.apply(&perp_gradient(psi)?);
        Ok(drift.lin_comb(1.0, &scale_by(&self.emphi, &perp(&p)), 1.0))
    }

    /// `∂_s∇p = 𝔥𝔦_ε X`.
    pub fn rhs(&self, grad_p: &VectorField, psi: &ScalarField) -> Result<VectorField> {
        Ok(self.rhs_with_mean(grad_p, psi)?.0)
    }

    /// Right-hand side together with the domain mean of `𝔦_ε X`, which on
    /// the torus is the harmonic residual `(α¹, α²)`.
    fn rhs_with_mean(&self, grad_p: &VectorField, psi: &ScalarField) -> Result<(VectorField, [f64; 2])> {
        let x = self.mollifier.apply(&self.bracket(grad_p, psi)?)?;
        let mean = x.mean();
        Ok((self.hodge.gradient_part(&x)?, mean))
    }

    /// Power-iteration estimate of `‖L‖` for the linear part
    /// `L(v) = rhs(v) − rhs(0)`.
    pub fn lipschitz_estimate(&self, psi: &ScalarField) -> Result<f64> {
        let zero = VectorField::zeros(&self.grid);
        let r0 = self.rhs(&zero, psi)?;
        // fixed start vector so that runs are reproducible
        let mut v = VectorField::from_fn(&self.grid, |x, y| [(7.0 * x + 3.0 * y).cos(), (5.0 * x - 2.0 * y).sin()]);
        let mut est = 0.0;
        for _ in 0..4 {
            let nv = l2_norm(&v);
            if nv == 0.0 {
                break;
            }
            v = v.scaled(1.0 / nv);
            let lv = self.rhs(&v, psi)?.lin_comb(1.0, &r0, -1.0);
            est = l2_norm(&lv);
            v = lv;
        }
        Ok(est)
    }

    fn substeps_for(&self, psi: &ScalarField) -> Result<usize> {
        Ok(match self.cfg.substeps {
            Substeps::Fixed(n) => n,
            Substeps::Auto => {
                let l = self.lipschitz_estimate(psi)?;
                ((self.cfg.tau * l).ceil() as usize).max(4)
            }
        })
    }

    fn start_step(&self, grad_p: &VectorField) -> Result<StepStart> {
        let bundle = build_bundle(grad_p, Some(&self.mollifier))?;
        let limit = 1.0 - self.cfg.stability_margin;
        if bundle.mu >= limit {
            let (x, y) = bundle.worst_node();
            return Err(SgError::StabilityViolation { mu: bundle.mu, limit, x, y });
        }
        let problem = assemble(&bundle, self.bc)?
            .with_tolerance(self.cfg.elliptic_tol)
            .with_max_iter(self.cfg.elliptic_max_iter);
        let solution = problem.solve(&bundle.f_rhs)?;
        Ok(StepStart { bundle, problem, solution })
    }

    fn record(&self, t: f64, grad_p: &VectorField, start: &StepStart, alpha: [f64; 2], theta_max: &mut f64) -> Result<DiagnosticsRecord> {
        let k = self.cfg.k;
        let hk_norm = sobolev_norm(grad_p, k)?;
        let mu = start.bundle.mu;
        let th = theta(hk_norm, mu, k)?;
        *theta_max = theta_max.max(th);
        let gp = l2_norm(grad_p);
        let curl_residual = if gp > 0.0 { l2_norm(&curl(grad_p)?) / gp } else { 0.0 };
        let a = &start.bundle.a;
        let coeff_norm = sobolev_norm(a, k - 1)?
            + sobolev_norm(&divergence_matrix(a)?, k - 1)?
            + sobolev_norm(&perp_gradient(&start.bundle.b_potential)?, k - 1)?;
        let (psi_h3_norm, p_h4_norm) = if k >= 4 {
            (Some(sobolev_norm(&start.solution.grad_psi, 3)?), Some(sobolev_norm(grad_p, 4)?))
        } else {
            (None, None)
        };
        let (alpha1, alpha2) = if self.grid.kind() == DomainKind::Torus { (alpha[0], alpha[1]) } else { (0.0, 0.0) };
        Ok(DiagnosticsRecord {
            t,
            l2_energy: 0.5 * gp * gp,
            hk_norm,
            mu,
            theta: th,
            theta_max: *theta_max,
            psi_hk_norm: sobolev_norm(&start.solution.grad_psi, k)?,
            alpha1,
            alpha2,
            curl_residual,
            solver_iters: start.solution.iterations,
            lambda: start.problem.lambda(),
            coeff_norm,
            flux_hk_norm: sobolev_norm(&start.bundle.f_rhs, k)?,
            psi_h3_norm,
            p_h4_norm,
        })
    }

    fn t_of(&self, i: usize) -> f64 {
        i as f64 * self.cfg.tau
    }

    /// One macro-step: freeze `ψ` from the current data, integrate over
    /// `[0, τ]`, advance the state. Returns the record of the step's start.
    /// On error the state is left untouched.
    pub fn macro_step(&self, state: &mut RunState) -> Result<DiagnosticsRecord> {
        let start = self.start_step(&state.grad_p)?;
        let psi = &start.solution.psi;
        let n_sub = self.substeps_for(psi)?;
        let h = self.cfg.tau / n_sub as f64;
        let mut g = state.grad_p.clone();
        let mut alpha = [0.0; 2];
        for sub in 0..n_sub {
            let (k1, mean) = self.rhs_with_mean(&g, psi)?;
            if sub == 0 {
                alpha = mean;
            }
            let k2 = self.rhs(&g.lin_comb(1.0, &k1, 0.5 * h), psi)?;
            let k3 = self.rhs(&g.lin_comb(1.0, &k2, 0.5 * h), psi)?;
            let k4 = self.rhs(&g.lin_comb(1.0, &k3, h), psi)?;
            let incr = k1.lin_comb(1.0, &k2, 2.0).lin_comb(1.0, &k3, 2.0).lin_comb(1.0, &k4, 1.0);
            g = g.lin_comb(1.0, &incr, h / 6.0);
        }
        if g.max_abs().is_nan() {
            return Err(SgError::Numerical(format!("state became non-finite in step {}", state.i)));
        }
        let mut theta_max = state.theta_max;
        let rec = self.record(self.t_of(state.i), &state.grad_p, &start, alpha, &mut theta_max)?;
        let every = self.cfg.snapshot_every;
        if every > 0 && state.i % every == 0 {
            state.history.push(StateSnapshot {
                step: state.i,
                t: rec.t,
                grad_p: state.grad_p.clone(),
                psi: Some(start.solution.psi.clone()),
                mu_field: Some(start.bundle.mu_field.clone()),
            });
        }
        state.theta_max = theta_max;
        state.grad_p = g;
        state.psi = Some(start.solution.psi);
        state.bundle = Some(start.bundle);
        state.i += 1;
        state.s = 0.0;
        Ok(rec)
    }

    /// Validate `p₀` and run up to the horizon. Errors in later steps halt
    /// the run gracefully; the history up to that point is returned.
    pub fn run(&self, p0: &ScalarField) -> Result<RunOutcome> {
        let (grad_p0, mu0) = self.validate_initial(p0)?;
        Ok(self.run_from_gradient(grad_p0, mu0))
    }

    /// Run from a gradient field that has already been validated.
    pub fn run_from_gradient(&self, grad_p0: VectorField, mu0: f64) -> RunOutcome {
        let mut state = RunState::new(grad_p0);
        let mut records = Vec::new();
        let mut halt = None;
        for _ in 0..self.cfg.n_steps() {
            match self.macro_step(&mut state) {
                Ok(rec) => records.push(rec),
                Err(e) => {
                    halt = Some(e);
                    break;
                }
            }
        }
        if halt.is_none() {
            // closing record at the horizon
            let t = self.t_of(state.i);
            match self.start_step(&state.grad_p) {
                Ok(start) => {
                    let alpha = self.rhs_with_mean(&state.grad_p, &start.solution.psi).map(|r| r.1).unwrap_or([0.0; 2]);
                    match self.record(t, &state.grad_p, &start, alpha, &mut state.theta_max) {
                        Ok(rec) => records.push(rec),
                        Err(e) => halt = Some(e),
                    }
                    state.bundle = Some(start.bundle);
                }
                Err(e) => halt = Some(e),
            }
        }
        let final_t = self.t_of(state.i);
        state.history.push(StateSnapshot {
            step: state.i,
            t: final_t,
            grad_p: state.grad_p.clone(),
            psi: None,
            mu_field: state.bundle.as_ref().map(|b| b.mu_field.clone()),
        });
        RunOutcome {
            records,
            snapshots: state.history,
            final_grad_p: state.grad_p,
            mu0,
            steps_completed: state.i,
            t_reached: final_t,
            halt,
        }
    }
}

/// See [`Stepper::validate_initial`].
pub fn validate_initial(p0: &ScalarField, cfg: &SolverConfig) -> Result<(VectorField, f64)> {
    Stepper::new(cfg.clone())?.validate_initial(p0)
}

/// See [`Stepper::rhs`].
pub fn rhs(grad_p: &VectorField, psi: &ScalarField, cfg: &SolverConfig) -> Result<VectorField> {
    if !grad_p.grid().compatible(psi.grid()) {
        return Err(SgError::Config("gradient and potential live on different grids".into()));
    }
    Stepper::new(cfg.clone())?.rhs(grad_p, psi)
}

/// See [`Stepper::macro_step`].
pub fn macro_step(state: &mut RunState, cfg: &SolverConfig) -> Result<DiagnosticsRecord> {
    Stepper::new(cfg.clone())?.macro_step(state)
}

/// See [`Stepper::run`].
pub fn run(p0: &ScalarField, cfg: &SolverConfig) -> Result<RunOutcome> {
    Stepper::new(cfg.clone())?.run(p0)
}
