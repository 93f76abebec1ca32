//! Running scenarios and refinement studies.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use sg_core::diagnostics::{
    fit_horizon_constant, mu_lipschitz, verify_elliptic_estimate, verify_energy_estimate, verify_theta_growth,
    DiagnosticsRecord,
};
use sg_core::grid::{l2_norm, Field, VectorField};
use sg_core::stepper::{RunOutcome, Stepper};
use sg_core::SgError;

use crate::config::RunConfig;
use crate::output::{
    path_for, write_diagnostics, write_field, write_field_csv, write_solver_log, write_summary, Fitted, Halt, Summary,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_STABILITY: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

pub fn exit_code(e: &SgError) -> i32 {
    match e {
        SgError::StabilityViolation { .. } => EXIT_STABILITY,
        SgError::SolverDiverged { .. } | SgError::Numerical(_) => EXIT_SOLVER,
        SgError::Config(_) | SgError::UnsupportedDomain { .. } => EXIT_CONFIG,
    }
}

fn halt_of(e: &SgError) -> Halt {
    let kind = match e {
        SgError::StabilityViolation { .. } => "stability",
        SgError::SolverDiverged { .. } => "solver",
        SgError::Numerical(_) => "numerical",
        SgError::Config(_) | SgError::UnsupportedDomain { .. } => "config",
    };
    let (mu, at) = match e {
        SgError::StabilityViolation { mu, x, y, .. } => (Some(*mu), Some([*x, *y])),
        _ => (None, None),
    };
    Halt { kind: kind.into(), message: e.to_string(), mu, at }
}

fn fit(records: &[DiagnosticsRecord], out: &RunOutcome, k: u32) -> Fitted {
    Fitted {
        theta_growth: verify_theta_growth(records).ok(),
        energy: verify_energy_estimate(records).ok(),
        mu_lipschitz: (records.len() >= 2).then(|| mu_lipschitz(records)),
        elliptic_ratio_max: (!records.is_empty()).then(|| verify_elliptic_estimate(records, k)),
        horizon: records
            .first()
            .filter(|_| out.t_reached > 0.0)
            .map(|r0| fit_horizon_constant(out.t_reached, r0.hk_norm, out.mu0, k)),
    }
}

/// Outcome of one scenario: the summary as written plus the final state.
#[derive(Debug)]
pub struct Report {
    pub summary: Summary,
    pub final_grad_p: Option<VectorField>,
}

fn base_summary(cfg: &RunConfig) -> Summary {
    let c = &cfg.solver;
    Summary {
        scenario: cfg.manifest.scenario.clone(),
        preset: cfg.manifest.preset.name().into(),
        n: c.n,
        k: c.k,
        epsilon: c.epsilon,
        tau: c.tau,
        t_final: c.t_final,
        steps_requested: c.n_steps(),
        steps_completed: 0,
        t_reached: 0.0,
        horizon_reached: false,
        mu0: None,
        halt: None,
        fitted: Fitted::default(),
        exit_code: EXIT_OK,
        files: Vec::new(),
    }
}

struct Writer<'a> {
    dir: &'a Path,
    scenario: &'a str,
    files: Vec<String>,
}

impl Writer<'_> {
    fn path(&mut self, suffix: &str) -> std::path::PathBuf {
        let p = path_for(self.dir, self.scenario, suffix);
        self.files.push(p.file_name().unwrap().to_string_lossy().into_owned());
        p
    }

    fn field<F: Field>(&mut self, name: &str, step: usize, f: &F) -> Result<()> {
        let p = self.path(&format!("{name}_{step:06}.sgf"));
        write_field(&p, f)?;
        let p = self.path(&format!("{name}_{step:06}.csv"));
        write_field_csv(&p, f)
    }
}

/// Run one scenario and write every output. Solver-side failures are
/// reported through the summary's exit code; only I/O problems are errors.
pub fn run_scenario(cfg: &RunConfig) -> Result<Report> {
    let m = &cfg.manifest;
    fs::create_dir_all(&m.output).with_context(|| format!("creating {}", m.output.display()))?;
    let mut summary = base_summary(cfg);
    let mut w = Writer { dir: &m.output, scenario: &m.scenario, files: Vec::new() };
    let summary_path = path_for(&m.output, &m.scenario, "summary.json");

    let finish = |mut summary: Summary, mut w: Writer, err: Option<&SgError>| -> Result<Summary> {
        if let Some(e) = err {
            summary.halt = Some(halt_of(e));
            summary.exit_code = exit_code(e);
        }
        w.files.push(summary_path.file_name().unwrap().to_string_lossy().into_owned());
        summary.files = w.files;
        write_summary(&summary_path, &summary)?;
        Ok(summary)
    };

    let stepper = match Stepper::new(cfg.solver.clone()) {
        Ok(s) => s,
        Err(e) => return Ok(Report { summary: finish(summary, w, Some(&e))?, final_grad_p: None }),
    };
    let p0 = match m.initial.sample(stepper.grid()) {
        Ok(p) => p,
        Err(e) => {
            let err = SgError::Config(format!("initial data: {e:#}"));
            return Ok(Report { summary: finish(summary, w, Some(&err))?, final_grad_p: None });
        }
    };
    let (grad0, mu0) = match stepper.validate_initial(&p0) {
        Ok(v) => v,
        Err(e) => {
            write_diagnostics(&w.path("diagnostics.csv"), &[])?;
            return Ok(Report { summary: finish(summary, w, Some(&e))?, final_grad_p: None });
        }
    };
    summary.mu0 = Some(mu0);

    let out = stepper.run_from_gradient(grad0, mu0);
    write_diagnostics(&w.path("diagnostics.csv"), &out.records)?;
    write_solver_log(&w.path("solver.csv"), &out.records, cfg.solver.k)?;
    for snap in &out.snapshots {
        w.field("gradp", snap.step, &snap.grad_p)?;
        if let Some(psi) = &snap.psi {
            w.field("psi", snap.step, psi)?;
        }
        if let Some(mu) = &snap.mu_field {
            w.field("mu", snap.step, mu)?;
        }
    }
    summary.steps_completed = out.steps_completed;
    summary.t_reached = out.t_reached;
    summary.horizon_reached = out.completed();
    summary.fitted = fit(&out.records, &out, cfg.solver.k);
    let summary = finish(summary, w, out.halt.as_ref())?;
    Ok(Report { summary, final_grad_p: Some(out.final_grad_p) })
}

/// One row of the refinement table.
#[derive(Debug, Clone, PartialEq)]
pub struct Level {
    pub level: usize,
    pub tau: f64,
    pub epsilon: f64,
    pub exit_code: i32,
    /// `‖∇p_j − ∇p_{j−1}‖_{L²}` at the horizon.
    pub difference: Option<f64>,
}

/// Halve `τ` and `ε` `levels − 1` times, run every member and tabulate the
/// terminal-state differences. Returns the table and the worst exit code.
pub fn refine(cfg: &RunConfig, levels: usize) -> Result<(Vec<Level>, i32)> {
    anyhow::ensure!(levels >= 2, "a refinement study needs at least two levels");
    let mut rows: Vec<Level> = Vec::new();
    let mut prev: Option<VectorField> = None;
    let mut worst = EXIT_OK;
    for level in 0..levels {
        let mut member = cfg.clone();
        let f = 0.5f64.powi(level as i32);
        member.solver.tau = cfg.solver.tau * f;
        member.solver.epsilon = if cfg.manifest.paper_mode { member.solver.tau } else { cfg.solver.epsilon * f };
        member.manifest.scenario = format!("{}_L{level}", cfg.manifest.scenario);
        let report = run_scenario(&member)?;
        worst = worst.max(report.summary.exit_code);
        let difference = match (&prev, &report.final_grad_p) {
            (Some(a), Some(b)) if report.summary.horizon_reached => Some(l2_norm(&b.lin_comb(1.0, a, -1.0))),
            _ => None,
        };
        rows.push(Level {
            level,
            tau: member.solver.tau,
            epsilon: member.solver.epsilon,
            exit_code: report.summary.exit_code,
            difference,
        });
        prev = report.final_grad_p.filter(|_| report.summary.horizon_reached);
    }
    let mut s = String::from("level,tau,epsilon,exit_code,l2_difference,ratio\n");
    for (i, r) in rows.iter().enumerate() {
        let ratio = match (i.checked_sub(1).and_then(|j| rows[j].difference), r.difference) {
            (Some(a), Some(b)) if b > 0.0 => format!("{:.16e}", a / b),
            _ => String::new(),
        };
        let diff = r.difference.map(|d| format!("{d:.16e}")).unwrap_or_default();
        s.push_str(&format!("{},{:.16e},{:.16e},{},{diff},{ratio}\n", r.level, r.tau, r.epsilon, r.exit_code));
    }
    let path = path_for(&cfg.manifest.output, &cfg.manifest.scenario, "refine.csv");
    fs::create_dir_all(&cfg.manifest.output)?;
    fs::write(&path, s).with_context(|| format!("writing {}", path.display()))?;
    Ok((rows, worst))
}

/// Build the operators and check the initial data without running.
/// Returns `μ₀`.
pub fn validate(cfg: &RunConfig) -> std::result::Result<f64, SgError> {
    let stepper = Stepper::new(cfg.solver.clone())?;
    let p0 = cfg.manifest.initial.sample(stepper.grid()).map_err(|e| SgError::Config(format!("initial data: {e:#}")))?;
    Ok(stepper.validate_initial(&p0)?.1)
}
