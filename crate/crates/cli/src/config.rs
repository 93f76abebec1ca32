//! `key = value` scenario files.
//!
//! One setting per line, `#` starts a comment, blank lines are ignored.
//! Unknown or repeated keys are errors. See the README for the key list.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sg_core::grid::{Quadratic, ScalarFn};
use sg_core::stepper::{SolverConfig, Substeps};
use thiserror::Error;

use crate::initial::InitialData;
use crate::presets::Preset;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}` given twice")]
    Duplicate { line: usize, key: String },
    #[error("line {line}: invalid value for `{key}`: {msg}")]
    Invalid { line: usize, key: String, msg: String },
    #[error("{0}")]
    Rule(String),
    #[error("cannot read {path}: {msg}")]
    Io { path: PathBuf, msg: String },
}

pub const KEYS: &[&str] = &[
    "preset",
    "extent",
    "radius",
    "omega",
    "n",
    "k",
    "epsilon",
    "tau",
    "substeps",
    "t_final",
    "stability_margin",
    "elliptic_tol",
    "elliptic_max_iter",
    "hodge_tol",
    "snapshot_every",
    "p0",
    "conformal",
    "coriolis",
    "output",
    "scenario",
    "paper_mode",
];

/// Everything a run needs besides the solver settings.
#[derive(Debug, Clone)]
pub struct Manifest {
    pub scenario: String,
    pub output: PathBuf,
    pub preset: Preset,
    pub initial: InitialData,
    pub paper_mode: bool,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub solver: SolverConfig,
    pub manifest: Manifest,
}

struct Entry {
    line: usize,
    value: String,
}

fn invalid(key: &str, e: &Entry, msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { line: e.line, key: key.into(), msg: msg.into() }
}

fn num<T: std::str::FromStr>(key: &str, e: &Entry) -> Result<T, ConfigError> {
    e.value.parse().map_err(|_| invalid(key, e, format!("cannot parse `{}`", e.value)))
}

fn quadratic(key: &str, e: &Entry) -> Result<Quadratic, ConfigError> {
    let c: Vec<f64> = e
        .value
        .split_whitespace()
        .map(|s| s.parse().map_err(|_| invalid(key, e, format!("cannot parse `{s}`"))))
        .collect::<Result<_, _>>()?;
    if c.len() != 6 {
        return Err(invalid(key, e, "expected six coefficients c0 cx cy cxx cxy cyy"));
    }
    Ok(Quadratic { c0: c[0], cx: c[1], cy: c[2], cxx: c[3], cxy: c[4], cyy: c[5] })
}

/// Parse scenario text. `base` resolves relative paths and `stem` is the
/// default scenario name.
pub fn parse_str(text: &str, base: &Path, stem: &str) -> Result<RunConfig, ConfigError> {
    let mut entries: BTreeMap<String, Entry> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::Syntax { line, text: content.into() });
        };
        let key = key.trim().to_string();
        if !KEYS.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey { line, key });
        }
        if entries.contains_key(&key) {
            return Err(ConfigError::Duplicate { line, key });
        }
        entries.insert(key, Entry { line, value: value.trim().to_string() });
    }
    let get = |k: &str| entries.get(k);

    let preset = match get("preset") {
        Some(e) => e.value.parse::<Preset>().map_err(|m| invalid("preset", e, m))?,
        None => Preset::FlatTorus,
    };
    let mut extent = preset.default_extent();
    if let Some(e) = get("extent") {
        if preset == Preset::SphericalCap {
            return Err(invalid("extent", e, "the spherical cap takes `radius`"));
        }
        extent = num("extent", e)?;
    }
    if let Some(e) = get("radius") {
        if !matches!(preset, Preset::SphericalCap | Preset::Disk) {
            return Err(invalid("radius", e, format!("`{}` has no radius", preset.name())));
        }
        extent = num("radius", e)?;
    }
    let mut omega = 1.0;
    if let Some(e) = get("omega") {
        if preset != Preset::SphericalCap {
            return Err(invalid("omega", e, "only the spherical cap has a rotation rate"));
        }
        omega = num("omega", e)?;
    }
    if !(extent > 0.0 && extent.is_finite()) {
        return Err(ConfigError::Rule(format!("domain size must be positive, got {extent}")));
    }
    if preset == Preset::SphericalCap && !(extent < 1.0 && omega > 0.0) {
        return Err(ConfigError::Rule(format!(
            "spherical cap needs 0 < radius < 1 (the Coriolis parameter vanishes at the equator) and omega > 0, got radius {extent}, omega {omega}"
        )));
    }
    let mut domain = preset.domain(extent, omega);
    let pots = [get("conformal"), get("coriolis")];
    if pots.iter().any(Option::is_some) {
        let mut q = [Quadratic::default(); 2];
        for (slot, (name, e)) in q.iter_mut().zip(["conformal", "coriolis"].iter().zip(pots)) {
            if let Some(e) = e {
                if preset == Preset::SphericalCap {
                    return Err(invalid(name, e, "the spherical cap fixes both potentials"));
                }
                *slot = quadratic(name, e)?;
                let linear = [slot.cx, slot.cy, slot.cxx, slot.cxy, slot.cyy];
                if preset == Preset::FlatTorus && linear.iter().any(|c| *c != 0.0) {
                    return Err(invalid(name, e, "only constant potentials are periodic"));
                }
            }
        }
        domain = domain.with_potentials(ScalarFn::new(q[0]), ScalarFn::new(q[1]));
    }

    let n = match get("n") {
        Some(e) => num("n", e)?,
        None => 64,
    };
    let mut cfg = SolverConfig::new(domain, n);
    if let Some(e) = get("k") {
        cfg.k = num("k", e)?;
    }
    if let Some(e) = get("tau") {
        cfg.tau = num("tau", e)?;
    }
    if let Some(e) = get("epsilon") {
        cfg.epsilon = num("epsilon", e)?;
    }
    if let Some(e) = get("t_final") {
        cfg.t_final = num("t_final", e)?;
    }
    if let Some(e) = get("substeps") {
        cfg.substeps = if e.value == "auto" {
            Substeps::Auto
        } else {
            let s: usize = num("substeps", e)?;
            if s == 0 {
                return Err(invalid("substeps", e, "must be `auto` or a positive integer"));
            }
            Substeps::Fixed(s)
        };
    }
    if let Some(e) = get("stability_margin") {
        cfg.stability_margin = num("stability_margin", e)?;
    }
    if let Some(e) = get("elliptic_tol") {
        cfg.elliptic_tol = num("elliptic_tol", e)?;
    }
    if let Some(e) = get("elliptic_max_iter") {
        cfg.elliptic_max_iter = num("elliptic_max_iter", e)?;
    }
    if let Some(e) = get("hodge_tol") {
        cfg.hodge_tol = num("hodge_tol", e)?;
    }
    if let Some(e) = get("snapshot_every") {
        cfg.snapshot_every = num("snapshot_every", e)?;
    }
    let paper_mode = match get("paper_mode") {
        Some(e) => match e.value.as_str() {
            "true" => true,
            "false" => false,
            _ => return Err(invalid("paper_mode", e, "expected `true` or `false`")),
        },
        None => false,
    };
    if paper_mode {
        if let Some(e) = get("epsilon") {
            return Err(invalid("epsilon", e, "paper_mode sets epsilon = tau"));
        }
        cfg.epsilon = cfg.tau;
    }

    let initial = match get("p0") {
        Some(e) => InitialData::parse(&e.value, base).map_err(|m| invalid("p0", e, m))?,
        None => InitialData::Zero,
    };
    let scenario = match get("scenario") {
        Some(e) => {
            let ok = !e.value.is_empty()
                && e.value.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.');
            if !ok {
                return Err(invalid("scenario", e, "use letters, digits, `_`, `-` and `.` only"));
            }
            e.value.clone()
        }
        None => stem.to_string(),
    };
    let output = match get("output") {
        Some(e) => base.join(&e.value),
        None => base.to_path_buf(),
    };

    // `τ = t'/N`: the horizon must be a whole number of macro-steps
    cfg.validate().map_err(|e| ConfigError::Rule(e.to_string()))?;
    Ok(RunConfig { solver: cfg, manifest: Manifest { scenario, output, preset, initial, paper_mode } })
}

/// Read and parse a scenario file. Relative paths inside it are resolved
/// against the file's directory.
pub fn parse_file(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io { path: path.into(), msg: e.to_string() })?;
    let base = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
    parse_str(&text, base, stem)
}

impl RunConfig {
    /// The effective configuration in the input format, defaults included.
    pub fn echo(&self) -> String {
        let c = &self.solver;
        let m = &self.manifest;
        let d = &c.domain;
        let mut s = String::new();
        let _ = writeln!(s, "scenario = {}", m.scenario);
        let _ = writeln!(s, "preset = {}", m.preset.name());
        match m.preset {
            Preset::SphericalCap => {
                let _ = writeln!(s, "radius = {}", d.extent);
                let _ = writeln!(s, "omega = {}", d.omega.unwrap_or(1.0));
            }
            Preset::Disk => {
                let _ = writeln!(s, "radius = {}", d.extent);
            }
            _ => {
                let _ = writeln!(s, "extent = {}", d.extent);
            }
        }
        let _ = writeln!(s, "# conformal: {}, coriolis: {}", d.conformal.describe(), d.coriolis.describe());
        let _ = writeln!(s, "n = {}", c.n);
        let _ = writeln!(s, "k = {}", c.k);
        let _ = writeln!(s, "epsilon = {}", c.epsilon);
        let _ = writeln!(s, "tau = {}", c.tau);
        let sub = match c.substeps {
            Substeps::Auto => "auto".to_string(),
            Substeps::Fixed(n) => n.to_string(),
        };
        let _ = writeln!(s, "substeps = {sub}");
        let _ = writeln!(s, "t_final = {}", c.t_final);
        let _ = writeln!(s, "stability_margin = {}", c.stability_margin);
        let _ = writeln!(s, "elliptic_tol = {:e}", c.elliptic_tol);
        let _ = writeln!(s, "elliptic_max_iter = {}", c.elliptic_max_iter);
        let _ = writeln!(s, "hodge_tol = {:e}", c.hodge_tol);
        let _ = writeln!(s, "snapshot_every = {}", c.snapshot_every);
        let _ = writeln!(s, "p0 = {}", m.initial.describe());
        let _ = writeln!(s, "paper_mode = {}", m.paper_mode);
        let _ = writeln!(s, "output = {}", m.output.display());
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        parse_str(text, Path::new("/tmp"), "demo")
    }

    #[test]
    fn minimal_file_gets_defaults() {
        let c = parse("").unwrap();
        assert_eq!(c.manifest.scenario, "demo");
        assert_eq!(c.solver.n, 64);
        assert_eq!(c.solver.k, 4);
        assert_eq!(c.manifest.preset, Preset::FlatTorus);
        assert!(c.echo().contains("tau = 0.001"));
    }

    #[test]
    fn unknown_key_is_named() {
        let err = parse("n = 32\nepsilonn = 0.1\n").unwrap_err();
        assert_eq!(err, ConfigError::UnknownKey { line: 2, key: "epsilonn".into() });
        assert!(err.to_string().contains("epsilonn"));
    }

    #[test]
    fn tau_must_divide_the_horizon() {
        let err = parse("tau = 0.003\nt_final = 0.01\n").unwrap_err();
        assert!(matches!(err, ConfigError::Rule(_)), "{err}");
    }

    #[test]
    fn paper_mode_ties_epsilon_to_tau() {
        let c = parse("paper_mode = true\ntau = 0.0125\nt_final = 0.1\n").unwrap();
        assert_eq!(c.solver.epsilon, 0.0125);
        assert!(parse("paper_mode = true\nepsilon = 0.1\n").is_err());
    }

    #[test]
    fn bad_values_report_key_and_line() {
        let err = parse("# comment\n\nn = many\n").unwrap_err();
        assert_eq!(err, ConfigError::Invalid { line: 3, key: "n".into(), msg: "cannot parse `many`".into() });
        assert!(matches!(parse("n = 8\nn = 8"), Err(ConfigError::Duplicate { line: 2, .. })));
        assert!(matches!(parse("just words"), Err(ConfigError::Syntax { line: 1, .. })));
    }

    #[test]
    fn potentials_follow_the_preset() {
        let c = parse("preset = square\nextent = 2\nconformal = 0 0 0 0.1 0 0.1\n").unwrap();
        assert!((c.solver.domain.conformal.value(1.0, 1.0) - 0.2).abs() < 1e-15);
        assert!(parse("conformal = 0 1 0 0 0 0").is_err());
        assert!(parse("preset = spherical-cap\ncoriolis = 0 0 0 0 0 0").is_err());
        assert!(parse("preset = spherical-cap\nradius = 1.2").is_err());
        assert!(parse("preset = square\nomega = 2").is_err());
    }
}
