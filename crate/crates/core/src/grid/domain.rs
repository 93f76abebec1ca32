//! Domain geometry and the two analytic potentials of a conformally flat
//! setting: the conformal potential `V` (metric `e^{-2V}(dx² + dy²)`) and
//! the Coriolis potential `φ` (Coriolis parameter `f = e^{-φ}`).

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

/// A smooth scalar function on the plane together with its gradient.
pub trait Potential: Send + Sync {
    fn value(&self, x: f64, y: f64) -> f64;
    fn gradient(&self, x: f64, y: f64) -> [f64; 2];
    fn describe(&self) -> String;
}

/// Shared handle to a [`Potential`].
#[derive(Clone)]
pub struct ScalarFn(Arc<dyn Potential>);

impl ScalarFn {
    pub fn new<P: Potential + 'static>(p: P) -> Self {
        Self(Arc::new(p))
    }

    pub fn zero() -> Self {
        Self::new(Quadratic::default())
    }

    /// Build from a pair of closures for the value and the gradient.
    pub fn from_closures<F, G>(name: &str, value: F, gradient: G) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64, f64) -> [f64; 2] + Send + Sync + 'static,
    {
        Self::new(ClosurePotential {
            name: name.to_string(),
            value: Box::new(value),
            gradient: Box::new(gradient),
        })
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        self.0.value(x, y)
    }

    pub fn gradient(&self, x: f64, y: f64) -> [f64; 2] {
        self.0.gradient(x, y)
    }

    pub fn describe(&self) -> String {
        self.0.describe()
    }
}

impl fmt::Debug for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarFn({})", self.0.describe())
    }
}

/// `c0 + cx·x + cy·y + cxx·x² + cxy·xy + cyy·y²`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Quadratic {
    pub c0: f64,
    pub cx: f64,
    pub cy: f64,
    pub cxx: f64,
    pub cxy: f64,
    pub cyy: f64,
}

impl Quadratic {
    pub fn is_zero(&self) -> bool {
        *self == Self::default()
    }
}

impl Potential for Quadratic {
    fn value(&self, x: f64, y: f64) -> f64 {
        self.c0 + self.cx * x + self.cy * y + self.cxx * x * x + self.cxy * x * y + self.cyy * y * y
    }

    fn gradient(&self, x: f64, y: f64) -> [f64; 2] {
        [
            self.cx + 2.0 * self.cxx * x + self.cxy * y,
            self.cy + self.cxy * x + 2.0 * self.cyy * y,
        ]
    }

    fn describe(&self) -> String {
        if self.is_zero() {
            "0".into()
        } else {
            format!(
                "quadratic({}, {}, {}, {}, {}, {})",
                self.c0, self.cx, self.cy, self.cxx, self.cxy, self.cyy
            )
        }
    }
}

/// Conformal potential of the sphere under stereographic projection from the
/// south pole: `e^{-2V} = 4 / (1 + |x|²)²`, i.e. `V = ln((1 + |x|²) / 2)`.
#[derive(Debug, Clone, Copy)]
pub struct StereographicConformal;

impl Potential for StereographicConformal {
    fn value(&self, x: f64, y: f64) -> f64 {
        ((1.0 + x * x + y * y) / 2.0).ln()
    }

    fn gradient(&self, x: f64, y: f64) -> [f64; 2] {
        let s = 2.0 / (1.0 + x * x + y * y);
        [s * x, s * y]
    }

    fn describe(&self) -> String {
        "stereographic_conformal".into()
    }
}

/// Coriolis potential of the rotating sphere under the same projection:
/// `f = 2ω (1 - |x|²) / (1 + |x|²) = e^{-φ}`. Only valid inside the unit disk.
#[derive(Debug, Clone, Copy)]
pub struct StereographicCoriolis {
    pub omega: f64,
}

impl Potential for StereographicCoriolis {
    fn value(&self, x: f64, y: f64) -> f64 {
        let r2 = x * x + y * y;
        -(2.0 * self.omega * (1.0 - r2) / (1.0 + r2)).ln()
    }

    fn gradient(&self, x: f64, y: f64) -> [f64; 2] {
        let r2 = x * x + y * y;
        let s = 4.0 / (1.0 - r2 * r2);
        [s * x, s * y]
    }

    fn describe(&self) -> String {
        format!("stereographic_coriolis(omega={})", self.omega)
    }
}

struct ClosurePotential {
    name: String,
    value: Box<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    gradient: Box<dyn Fn(f64, f64) -> [f64; 2] + Send + Sync>,
}

impl Potential for ClosurePotential {
    fn value(&self, x: f64, y: f64) -> f64 {
        (self.value)(x, y)
    }

    fn gradient(&self, x: f64, y: f64) -> [f64; 2] {
        (self.gradient)(x, y)
    }

    fn describe(&self) -> String {
        self.name.clone()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    /// Periodic `[0, L)²`.
    Torus,
    /// `[0, L]²`, cell-centred nodes.
    Square,
    /// Disk of radius `R` centred at the origin, polar grid with a staggered pole.
    Disk,
}

impl DomainKind {
    pub fn name(self) -> &'static str {
        match self {
            DomainKind::Torus => "torus",
            DomainKind::Square => "square",
            DomainKind::Disk => "disk",
        }
    }
}

/// Geometry plus the conformal and Coriolis potentials.
#[derive(Debug, Clone)]
pub struct DomainSpec {
    pub kind: DomainKind,
    /// Side length (torus, square) or radius (disk).
    pub extent: f64,
    pub conformal: ScalarFn,
    pub coriolis: ScalarFn,
    /// Rotation rate, recorded for the spherical preset only.
    pub omega: Option<f64>,
}

impl DomainSpec {
    pub fn new(kind: DomainKind, extent: f64) -> Self {
        Self {
            kind,
            extent,
            conformal: ScalarFn::zero(),
            coriolis: ScalarFn::zero(),
            omega: None,
        }
    }

    /// Flat periodic torus `[0, L)²` with `V = φ = 0`.
    pub fn flat_torus(extent: f64) -> Self {
        Self::new(DomainKind::Torus, extent)
    }

    /// The standard `[0, 2π)²` torus.
    pub fn standard_torus() -> Self {
        Self::flat_torus(2.0 * PI)
    }

    pub fn square(extent: f64) -> Self {
        Self::new(DomainKind::Square, extent)
    }

    pub fn disk(radius: f64) -> Self {
        Self::new(DomainKind::Disk, radius)
    }

    /// Polar cap of the rotating sphere seen through stereographic projection.
    pub fn spherical_cap(omega: f64, radius: f64) -> Self {
        Self {
            kind: DomainKind::Disk,
            extent: radius,
            conformal: ScalarFn::new(StereographicConformal),
            coriolis: ScalarFn::new(StereographicCoriolis { omega }),
            omega: Some(omega),
        }
    }

    pub fn with_potentials(mut self, conformal: ScalarFn, coriolis: ScalarFn) -> Self {
        self.conformal = conformal;
        self.coriolis = coriolis;
        self
    }

    pub fn is_torus(&self) -> bool {
        self.kind == DomainKind::Torus
    }

    /// Geometric identity, ignoring the potentials.
    pub fn same_geometry(&self, other: &DomainSpec) -> bool {
        self.kind == other.kind && self.extent == other.extent
    }
}
