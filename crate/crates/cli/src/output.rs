//! Files written by a run.
//!
//! Field dumps are little-endian: the magic `SGF1`, `u32` N, `u32` number of
//! components, four reserved zero bytes, then `N²` nodes in row-major order
//! with the components of each node adjacent, as `f64`.

use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use sg_core::diagnostics::{elliptic_estimate_ratio, DiagnosticsRecord, CSV_HEADER};
use sg_core::grid::Field;

pub const MAGIC: &[u8; 4] = b"SGF1";
const HEADER_LEN: usize = 16;

pub fn write_field<F: Field>(path: &Path, field: &F) -> Result<()> {
    let n = field.grid().n();
    let comps = field.components().len();
    let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    w.write_all(MAGIC)?;
    w.write_all(&(n as u32).to_le_bytes())?;
    w.write_all(&(comps as u32).to_le_bytes())?;
    w.write_all(&[0u8; 4])?;
    for v in field.interleaved() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// `(N, components, interleaved samples)` of a dump.
pub fn read_field(path: &Path) -> Result<(usize, usize, Vec<f64>)> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .with_context(|| format!("reading {}", path.display()))?;
    if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
        bail!("{} is not a field dump", path.display());
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap()) as usize;
    let (n, comps) = (word(4), word(8));
    let body = &bytes[HEADER_LEN..];
    if body.len() != n * n * comps * 8 {
        bail!("{}: expected {} samples, found {} bytes", path.display(), n * n * comps, body.len());
    }
    let data = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    Ok((n, comps, data))
}

/// `x,y,c0[,c1...]` per node, for plotting.
pub fn write_field_csv<F: Field>(path: &Path, field: &F) -> Result<()> {
    let g = field.grid();
    let comps = field.components();
    let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    let names: Vec<String> = (0..comps.len()).map(|c| format!("c{c}")).collect();
    writeln!(w, "x,y,{}", names.join(","))?;
    for k in 0..g.len() {
        let (x, y) = g.coords(k);
        write!(w, "{x:.16e},{y:.16e}")?;
        for c in &comps {
            write!(w, ",{:.16e}", c[k])?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_diagnostics(path: &Path, records: &[DiagnosticsRecord]) -> Result<()> {
    let mut s = String::with_capacity(256 * (records.len() + 1));
    s.push_str(CSV_HEADER);
    s.push('\n');
    for r in records {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    fs::write(path, s).with_context(|| format!("writing {}", path.display()))
}

pub const SOLVER_HEADER: &str =
    "step,t,solver_iters,lambda,coeff_norm,flux_hk_norm,elliptic_ratio,psi_h3_norm,p_h4_norm";

/// Per-step elliptic data that does not belong in the diagnostics CSV.
/// Missing norms are left empty.
pub fn write_solver_log(path: &Path, records: &[DiagnosticsRecord], k: u32) -> Result<()> {
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.16e}")).unwrap_or_default();
    let mut s = String::from(SOLVER_HEADER);
    s.push('\n');
    for (i, r) in records.iter().enumerate() {
        let ratio = elliptic_estimate_ratio(r.psi_hk_norm, r.lambda, r.coeff_norm, r.flux_hk_norm, k);
        s.push_str(&format!(
            "{i},{:.16e},{},{:.16e},{:.16e},{:.16e},{:.16e},{},{}\n",
            r.t,
            r.solver_iters,
            r.lambda,
            r.coeff_norm,
            r.flux_hk_norm,
            ratio,
            opt(r.psi_h3_norm),
            opt(r.p_h4_norm)
        ));
    }
    fs::write(path, s).with_context(|| format!("writing {}", path.display()))
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Halt {
    /// `stability`, `solver`, `numerical` or `config`.
    pub kind: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub at: Option<[f64; 2]>,
}

/// Constants fitted to the history. Reports only.
#[derive(Debug, Clone, Default, Serialize, PartialEq)]
pub struct Fitted {
    pub theta_growth: Option<f64>,
    pub energy: Option<f64>,
    pub mu_lipschitz: Option<f64>,
    pub elliptic_ratio_max: Option<f64>,
    pub horizon: Option<f64>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Summary {
    pub scenario: String,
    pub preset: String,
    pub n: usize,
    pub k: u32,
    pub epsilon: f64,
    pub tau: f64,
    pub t_final: f64,
    pub steps_requested: usize,
    pub steps_completed: usize,
    pub t_reached: f64,
    pub horizon_reached: bool,
    pub mu0: Option<f64>,
    pub halt: Option<Halt>,
    pub fitted: Fitted,
    pub exit_code: i32,
    pub files: Vec<String>,
}

pub fn write_summary(path: &Path, summary: &Summary) -> Result<()> {
    let mut text = serde_json::to_string_pretty(summary)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// `<dir>/<scenario>_<suffix>`.
pub fn path_for(dir: &Path, scenario: &str, suffix: &str) -> PathBuf {
    dir.join(format!("{scenario}_{suffix}"))
}
