//! Initial pressure `p₀`.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use sg_core::grid::{Field, Grid, ScalarField};

use crate::output::read_field;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Wave {
    Cos,
    Sin,
}

/// `amplitude · cos|sin(kx·x + ky·y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub amplitude: f64,
    pub wave: Wave,
    pub k: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    Zero,
    Modes(Vec<Mode>),
    /// A one-component field dump on the run's grid.
    File(PathBuf),
}

impl InitialData {
    /// `zero`, `modes: 0.3 cos 1 0; 0.2 sin 0 1`, or `file: path`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, String> {
        let text = text.trim();
        if text == "zero" {
            return Ok(InitialData::Zero);
        }
        if let Some(path) = text.strip_prefix("file:") {
            let path = path.trim();
            if path.is_empty() {
                return Err("missing path after `file:`".into());
            }
            return Ok(InitialData::File(base.join(path)));
        }
        let Some(list) = text.strip_prefix("modes:") else {
            return Err(format!("expected `zero`, `modes: ...` or `file: ...`, got `{text}`"));
        };
        let mut modes = Vec::new();
        for term in list.split(';').map(str::trim).filter(|t| !t.is_empty()) {
            let parts: Vec<&str> = term.split_whitespace().collect();
            let [amp, wave, kx, ky] = parts[..] else {
                return Err(format!("mode `{term}` should read `amplitude cos|sin kx ky`"));
            };
            let f = |s: &str| s.parse::<f64>().map_err(|_| format!("cannot parse `{s}` in mode `{term}`"));
            let wave = match wave {
                "cos" => Wave::Cos,
                "sin" => Wave::Sin,
                other => return Err(format!("unknown wave `{other}` in mode `{term}`")),
            };
            modes.push(Mode { amplitude: f(amp)?, wave, k: [f(kx)?, f(ky)?] });
        }
        if modes.is_empty() {
            return Err("`modes:` needs at least one mode".into());
        }
        Ok(InitialData::Modes(modes))
    }

    pub fn describe(&self) -> String {
        match self {
            InitialData::Zero => "zero".into(),
            InitialData::Modes(ms) => {
                let terms: Vec<String> = ms
                    .iter()
                    .map(|m| {
                        let w = if m.wave == Wave::Cos { "cos" } else { "sin" };
                        format!("{} {w} {} {}", m.amplitude, m.k[0], m.k[1])
                    })
                    .collect();
                format!("modes: {}", terms.join("; "))
            }
            InitialData::File(p) => format!("file: {}", p.display()),
        }
    }

    pub fn sample(&self, grid: &Arc<Grid>) -> anyhow::Result<ScalarField> {
        Ok(match self {
            InitialData::Zero => ScalarField::zeros(grid),
            InitialData::Modes(ms) => ScalarField::from_fn(grid, |x, y| {
                ms.iter()
                    .map(|m| {
                        let t = m.k[0] * x + m.k[1] * y;
                        m.amplitude * if m.wave == Wave::Cos { t.cos() } else { t.sin() }
                    })
                    .sum()
            }),
            InitialData::File(path) => {
                let (n, comps, data) = read_field(path)?;
                anyhow::ensure!(
                    n == grid.n() && comps == 1,
                    "{} holds a {n}x{n} field with {comps} components, the run needs {m}x{m} with 1",
                    path.display(),
                    m = grid.n()
                );
                ScalarField::new(grid.clone(), data)
            }
        })
    }
}
