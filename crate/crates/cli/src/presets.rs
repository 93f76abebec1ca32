//! Named domains.

use std::f64::consts::PI;
use std::str::FromStr;

use sg_core::grid::DomainSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Periodic square with `V = φ = 0` unless constants are given.
    FlatTorus,
    /// Polar cap of the rotating sphere under stereographic projection.
    SphericalCap,
    /// `[0, L]²` with optional quadratic potentials.
    Square,
    /// Disk of radius `R` with optional quadratic potentials.
    Disk,
}

pub const ALL: [Preset; 4] = [Preset::FlatTorus, Preset::SphericalCap, Preset::Square, Preset::Disk];

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::FlatTorus => "flat-torus",
            Preset::SphericalCap => "spherical-cap",
            Preset::Square => "square",
            Preset::Disk => "disk",
        }
    }

    pub fn default_extent(self) -> f64 {
        match self {
            Preset::FlatTorus | Preset::Square => 2.0 * PI,
            Preset::SphericalCap => 0.8,
            Preset::Disk => 1.0,
        }
    }

    pub fn domain(self, extent: f64, omega: f64) -> DomainSpec {
        match self {
            Preset::FlatTorus => DomainSpec::flat_torus(extent),
            Preset::SphericalCap => DomainSpec::spherical_cap(omega, extent),
            Preset::Square => DomainSpec::square(extent),
            Preset::Disk => DomainSpec::disk(extent),
        }
    }

    pub fn summary(self) -> &'static str {
        match self {
            Preset::FlatTorus => "periodic [0, extent)^2, spectral derivatives (extent = 2pi)",
            Preset::SphericalCap => {
                "stereographic polar cap of a sphere rotating at omega, |x| < radius < 1 (omega = 1, radius = 0.8)"
            }
            Preset::Square => "[0, extent]^2, psi = 0 on the boundary (extent = 2pi)",
            Preset::Disk => "disk of the given radius, polar grid (radius = 1)",
        }
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        ALL.iter()
            .copied()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown preset `{s}` (expected one of flat-torus, spherical-cap, square, disk)"))
    }
}
