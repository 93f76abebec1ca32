//! The velocity-potential problem
//! `div(A∇ψ) + ∇⊥f·∇ψ = div F`, with `ψ = 0` on `∂Ω` or zero-mean `ψ` on
//! the torus.
//!
//! The first-order term is carried as the antisymmetric matrix
//! `Ã = [[0, f], [−f, 0]]`, since `div(Ã∇ψ) = ∇⊥f·∇ψ`, and the whole operator
//! is discretised through the weak form
//!
//! ```text
//! a(ψ, χ) = Σ w ∇χ·(A + Ã)∇ψ = Σ w F·∇χ
//! ```
//!
//! Diagonal couplings live on cell faces (two-point differences), the
//! off-diagonal ones on cell corners (averaged differences). Face and
//! corner coefficients are arithmetic averages of nodal values, linearly
//! extrapolated at the boundary. Dirichlet ghosts mirror with a sign flip,
//! Neumann ghosts without; boundary faces and corners carry half weight.
//! On the disk everything is written in the polar frame (`Ã` is rotation
//! invariant) and faces touching the pole have zero weight.
//!
//! With these choices the symmetric part of the matrix is exactly
//! symmetric and the `Ã` part is exactly skew, mirroring the continuous
//! energy identity.

use std::sync::Arc;

use rayon::prelude::*;

use crate::coeffs::{lambda_min_sym, CoeffBundle};
use crate::error::{Result, SgError};
use crate::fastpoisson::{Axis1Basis, FastPoisson};
use crate::grid::ops::{gradient, perp, potential_weight, scale_by};
use crate::grid::{l2_norm, DomainKind, Field, Grid, MatrixField, ScalarField, VectorField};
use crate::krylov::{gmres, GmresOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryCondition {
    /// `ψ = 0` on `∂Ω` (square, disk).
    Dirichlet,
    /// `∂_ν ψ = (flux)·ν` on `∂Ω`; solution normalised to zero mean (square, disk).
    Neumann,
    /// Periodic, normalised to zero mean (torus).
    PeriodicZeroMean,
}

impl BoundaryCondition {
    /// The condition the velocity potential satisfies on a domain kind.
    pub fn natural_for(kind: DomainKind) -> Self {
        match kind {
            DomainKind::Torus => BoundaryCondition::PeriodicZeroMean,
            _ => BoundaryCondition::Dirichlet,
        }
    }

    fn singular(self) -> bool {
        self != BoundaryCondition::Dirichlet
    }
}

#[derive(Debug, Clone, Copy)]
struct NodeRef {
    idx: u32,
    sign: f64,
}

#[derive(Debug, Clone)]
struct Face {
    axis: u8,
    a: NodeRef,
    b: NodeRef,
    inv_s: f64,
    w: f64,
    stencil: [(u32, f64); 2],
}

impl Face {
    fn functional(&self) -> [(u32, f64); 2] {
        [(self.a.idx, -self.a.sign * self.inv_s), (self.b.idx, self.b.sign * self.inv_s)]
    }
}

#[derive(Debug, Clone)]
struct Corner {
    /// `ll, rl, lr, rr` in (axis 0, axis 1) order.
    nodes: [NodeRef; 4],
    inv0: f64,
    inv1: f64,
    w: f64,
    stencil: [(u32, f64); 4],
}

impl Corner {
    fn g0(&self) -> [(u32, f64); 4] {
        let s = [-1.0, 1.0, -1.0, 1.0];
        std::array::from_fn(|m| (self.nodes[m].idx, s[m] * self.nodes[m].sign * self.inv0))
    }

    fn g1(&self) -> [(u32, f64); 4] {
        let s = [-1.0, -1.0, 1.0, 1.0];
        std::array::from_fn(|m| (self.nodes[m].idx, s[m] * self.nodes[m].sign * self.inv1))
    }
}

#[derive(Debug, Clone, Copy)]
enum Axis {
    Periodic,
    /// Walls at both ends with the given ghost sign.
    Wall(f64),
    /// Pole at the lower end (zero weight), wall at the upper end.
    PoleWall(f64),
}

impl Axis {
    fn positions(self, n: usize) -> std::ops::Range<isize> {
        match self {
            Axis::Wall(_) => -1..n as isize,
            _ => 0..n as isize,
        }
    }

    fn boundary(self, p: isize, n: usize) -> bool {
        match self {
            Axis::Periodic => false,
            Axis::Wall(_) => p == -1 || p == n as isize - 1,
            Axis::PoleWall(_) => p == n as isize - 1,
        }
    }

    fn map(self, pos: isize, n: usize) -> (usize, f64) {
        let ni = n as isize;
        match self {
            Axis::Periodic => (pos.rem_euclid(ni) as usize, 1.0),
            Axis::Wall(s) | Axis::PoleWall(s) => {
                if pos < 0 {
                    (0, s)
                } else if pos >= ni {
                    (n - 1, s)
                } else {
                    (pos as usize, 1.0)
                }
            }
        }
    }

    /// Interpolation weights for the midpoint between `p` and `p + 1`.
    fn mid(self, p: isize, n: usize) -> [(usize, f64); 2] {
        let ni = n as isize;
        match self {
            Axis::Periodic => [(p.rem_euclid(ni) as usize, 0.5), ((p + 1).rem_euclid(ni) as usize, 0.5)],
            _ if p < 0 => [(0, 1.5), (1, -0.5)],
            _ if p + 1 >= ni => [(n - 1, 1.5), (n - 2, -0.5)],
            _ => [(p as usize, 0.5), (p as usize + 1, 0.5)],
        }
    }
}

#[derive(Debug, Clone)]
struct Geometry {
    faces: Vec<Face>,
    corners: Vec<Corner>,
}

fn axes(grid: &Grid, bc: BoundaryCondition) -> Result<(Axis, Axis)> {
    let sign = match bc {
        BoundaryCondition::Dirichlet => -1.0,
        _ => 1.0,
    };
    match (grid.kind(), bc) {
        (DomainKind::Torus, BoundaryCondition::PeriodicZeroMean) => Ok((Axis::Periodic, Axis::Periodic)),
        (DomainKind::Torus, _) => Err(SgError::UnsupportedDomain { op: "wall boundary condition", domain: "torus" }),
        (kind, BoundaryCondition::PeriodicZeroMean) => {
            Err(SgError::UnsupportedDomain { op: "periodic boundary condition", domain: kind.name() })
        }
        (DomainKind::Square, _) => Ok((Axis::Wall(sign), Axis::Wall(sign))),
        (DomainKind::Disk, _) => Ok((Axis::PoleWall(sign), Axis::Periodic)),
    }
}

fn geometry(grid: &Grid, a0: Axis, a1: Axis) -> Geometry {
    let n = grid.n();
    let (h0, h1) = (grid.h0(), grid.h1());
    let polar = grid.kind() == DomainKind::Disk;
    let radial_face = |p: isize| if polar { (p + 1) as f64 * h0 } else { 1.0 };
    let radial_node = |i: usize| if polar { grid.radius(i) } else { 1.0 };
    let half = |b: bool| if b { 0.5 } else { 1.0 };
    let node = |i: isize, j: isize| {
        let (ii, si) = a0.map(i, n);
        let (jj, sj) = a1.map(j, n);
        NodeRef { idx: (ii * n + jj) as u32, sign: si * sj }
    };
    let mut faces = Vec::new();
    for p in a0.positions(n) {
        let w = h0 * h1 * radial_face(p) * half(a0.boundary(p, n));
        let m = a0.mid(p, n);
        for j in 0..n {
            faces.push(Face {
                axis: 0,
                a: node(p, j as isize),
                b: node(p + 1, j as isize),
                inv_s: 1.0 / h0,
                w,
                stencil: [((m[0].0 * n + j) as u32, m[0].1), ((m[1].0 * n + j) as u32, m[1].1)],
            });
        }
    }
    for i in 0..n {
        let r = radial_node(i);
        for q in a1.positions(n) {
            let m = a1.mid(q, n);
            faces.push(Face {
                axis: 1,
                a: node(i as isize, q),
                b: node(i as isize, q + 1),
                inv_s: 1.0 / (h1 * r),
                w: h0 * h1 * r * half(a1.boundary(q, n)),
                stencil: [((i * n + m[0].0) as u32, m[0].1), ((i * n + m[1].0) as u32, m[1].1)],
            });
        }
    }
    let mut corners = Vec::new();
    for p in a0.positions(n) {
        let r = radial_face(p);
        let m0 = a0.mid(p, n);
        for q in a1.positions(n) {
            let m1 = a1.mid(q, n);
            let stencil = std::array::from_fn(|t| {
                let (u, v) = (m0[t / 2], m1[t % 2]);
                ((u.0 * n + v.0) as u32, u.1 * v.1)
            });
            corners.push(Corner {
                nodes: [node(p, q), node(p + 1, q), node(p, q + 1), node(p + 1, q + 1)],
                inv0: 0.5 / h0,
                inv1: 0.5 / (h1 * r),
                w: h0 * h1 * r * half(a0.boundary(p, n)) * half(a1.boundary(q, n)),
                stencil,
            });
        }
    }
    Geometry { faces, corners }
}

/// Compressed sparse rows.
#[derive(Debug, Clone)]
pub(crate) struct Csr {
    offsets: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl Csr {
    fn from_triplets(n: usize, mut t: Vec<(u32, u32, f64)>) -> Self {
        t.sort_by_key(|a| (a.0, a.1));
        let mut offsets = vec![0; n + 1];
        let mut cols = Vec::with_capacity(t.len() / 4);
        let mut vals: Vec<f64> = Vec::with_capacity(t.len() / 4);
        let mut last: Option<(u32, u32)> = None;
        for (r, c, v) in t {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                offsets[r as usize + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..n {
            offsets[r + 1] += offsets[r];
        }
        Self { offsets, cols, vals }
    }

    pub(crate) fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.offsets.len() - 1)
            .into_par_iter()
            .map(|r| {
                let (a, b) = (self.offsets[r], self.offsets[r + 1]);
                self.cols[a..b].iter().zip(&self.vals[a..b]).map(|(&c, v)| v * x[c as usize]).sum()
            })
            .collect()
    }
}

/// Nodal coefficients expressed in the grid's axis frame.
struct FrameCoefficients {
    m00: Vec<f64>,
    m01: Vec<f64>,
    m11: Vec<f64>,
    skew: Vec<f64>,
}

/// Rotate a symmetric Cartesian tensor into the polar frame at each node.
fn to_frame(grid: &Grid, a: &MatrixField, skew: &ScalarField) -> FrameCoefficients {
    let len = grid.len();
    let n = grid.n();
    let sym = a.symmetric_part();
    let (mut m00, mut m01, mut m11) = (sym.m[0].clone(), sym.m[1].clone(), sym.m[3].clone());
    if grid.kind() == DomainKind::Disk {
        for k in 0..len {
            let j = k % n;
            let (c, s) = (grid.cos_theta()[j], grid.sin_theta()[j]);
            let (axx, axy, ayy) = (sym.m[0][k], sym.m[1][k], sym.m[3][k]);
            m00[k] = c * c * axx + 2.0 * c * s * axy + s * s * ayy;
            m01[k] = -c * s * axx + (c * c - s * s) * axy + c * s * ayy;
            m11[k] = s * s * axx - 2.0 * c * s * axy + c * c * ayy;
        }
    }
    FrameCoefficients { m00, m01, m11, skew: skew.data.clone() }
}

fn to_frame_vector(grid: &Grid, v: &VectorField) -> [Vec<f64>; 2] {
    if grid.kind() != DomainKind::Disk {
        return [v.x.clone(), v.y.clone()];
    }
    let n = grid.n();
    let mut r = vec![0.0; grid.len()];
    let mut t = vec![0.0; grid.len()];
    for k in 0..grid.len() {
        let j = k % n;
        let (c, s) = (grid.cos_theta()[j], grid.sin_theta()[j]);
        r[k] = c * v.x[k] + s * v.y[k];
        t[k] = -s * v.x[k] + c * v.y[k];
    }
    [r, t]
}

fn interp<const M: usize>(v: &[f64], st: &[(u32, f64); M]) -> f64 {
    st.iter().map(|(i, w)| w * v[*i as usize]).sum()
}

/// An assembled, preconditioned elliptic problem ready to be solved for
/// any number of right-hand sides.
#[derive(Debug, Clone)]
pub struct EllipticProblem {
    grid: Arc<Grid>,
    bc: BoundaryCondition,
    geom: Geometry,
    matrix: Csr,
    precond: FastPoisson,
    lambda: f64,
    opts: GmresOptions,
}

/// Result of one solve.
#[derive(Debug, Clone)]
pub struct EllipticSolution {
    pub psi: ScalarField,
    pub grad_psi: VectorField,
    /// `u = −e^{2V}∇⊥ψ`.
    pub velocity: VectorField,
    /// Final relative residual of the linear system.
    pub residual: f64,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    /// `‖F‖_{L²}` of the flux the problem was solved for.
    pub flux_l2: f64,
    /// Mean of the discrete load removed before a singular solve (roundoff
    /// sized for exact divergence data).
    pub compatibility_defect: f64,
}

/// Assemble the velocity-potential problem for a coefficient bundle.
pub fn assemble(bundle: &CoeffBundle, bc: BoundaryCondition) -> Result<EllipticProblem> {
    if bundle.mu >= 1.0 {
        let (x, y) = bundle.worst_node();
        return Err(SgError::StabilityViolation { mu: bundle.mu, limit: 1.0, x, y });
    }
    assemble_coefficients(&bundle.a, &bundle.b_potential, bc)
}

/// Assemble for arbitrary coefficients `A` (symmetric part used) and
/// first-order potential `f`.
pub fn assemble_coefficients(a: &MatrixField, skew: &ScalarField, bc: BoundaryCondition) -> Result<EllipticProblem> {
    let grid = a.grid().clone();
    if !grid.compatible(skew.grid()) {
        return Err(SgError::Config("coefficients live on different grids".into()));
    }
    let lambda = (0..grid.len())
        .map(|k| lambda_min_sym(a.m[0][k], 0.5 * (a.m[1][k] + a.m[2][k]), a.m[3][k]))
        .fold(f64::INFINITY, f64::min);
    if !(lambda > 0.0) {
        return Err(SgError::Numerical(format!("elliptic matrix is not positive definite (min eigenvalue {lambda:.3e})")));
    }
    let (a0, a1) = axes(&grid, bc)?;
    let geom = geometry(&grid, a0, a1);
    let c = to_frame(&grid, a, skew);
    let n = grid.n();
    let len = grid.len();

    let mut trip: Vec<(u32, u32, f64)> = Vec::with_capacity(len * 24);
    // axis-1 coefficient averages per row, for the separable preconditioner
    let mut row1 = vec![0.0; n];
    let mut row1_count = vec![0usize; n];
    for f in &geom.faces {
        let coef = interp(if f.axis == 0 { &c.m00 } else { &c.m11 }, &f.stencil);
        let fun = f.functional();
        for &(r, cr) in &fun {
            for &(q, cq) in &fun {
                trip.push((r, q, f.w * coef * cr * cq));
            }
        }
        if f.axis == 1 {
            let i = f.a.idx as usize / n;
            row1[i] += coef;
            row1_count[i] += 1;
        }
    }
    for cn in &geom.corners {
        let sym = interp(&c.m01, &cn.stencil);
        let sk = interp(&c.skew, &cn.stencil);
        let (m01, m10) = (sym + sk, sym - sk);
        let (g0, g1) = (cn.g0(), cn.g1());
        for &(r, cr) in &g0 {
            for &(q, cq) in &g1 {
                trip.push((r, q, cn.w * m01 * cr * cq));
                trip.push((q, r, cn.w * m10 * cq * cr));
            }
        }
    }
    let matrix = Csr::from_triplets(len, trip);

    let precond = match grid.kind() {
        DomainKind::Torus => {
            let scale = (0..len).map(|k| 0.5 * (c.m00[k] + c.m11[k])).sum::<f64>() / len as f64;
            FastPoisson::spectral(&grid, scale)
        }
        _ => {
            // axis-0 face coefficients averaged over axis 1, keyed by position p + 1
            let positions: Vec<isize> = a0.positions(n).collect();
            let mut face0 = vec![0.0; n + 1];
            for &p in &positions {
                let m = a0.mid(p, n);
                let s: f64 = (0..n).map(|j| m[0].1 * c.m00[m[0].0 * n + j] + m[1].1 * c.m00[m[1].0 * n + j]).sum();
                face0[(p + 1) as usize] = s / n as f64;
            }
            let mut sub = vec![0.0; n];
            let mut diag = vec![0.0; n];
            let mut sup = vec![0.0; n];
            let (h0, h1) = (grid.h0(), grid.h1());
            let polar = grid.kind() == DomainKind::Disk;
            for &p in &positions {
                let coef = face0[(p + 1) as usize];
                let r = if polar { (p + 1) as f64 * h0 } else { 1.0 };
                let w = h0 * h1 * r * if a0.boundary(p, n) { 0.5 } else { 1.0 } * coef / (h0 * h0);
                let (ia, sa) = a0.map(p, n);
                let (ib, sb) = a0.map(p + 1, n);
                // w (sb u_b − sa u_a)²
                let refs = [(ia, -sa), (ib, sb)];
                for &(r1, c1) in &refs {
                    for &(r2, c2) in &refs {
                        let v = w * c1 * c2;
                        if r1 == r2 {
                            diag[r1] += v;
                        } else if r2 == r1 + 1 {
                            sup[r1] += v;
                        } else {
                            sub[r1] += v;
                        }
                    }
                }
            }
            let shift: Vec<f64> = (0..n)
                .map(|i| {
                    let r = if polar { grid.radius(i) } else { 1.0 };
                    let coef = row1[i] / row1_count[i] as f64;
                    h0 * h1 * r * coef / (h1 * r).powi(2)
                })
                .collect();
            let basis = match (grid.kind(), bc) {
                (DomainKind::Disk, _) => Axis1Basis::Periodic,
                (_, BoundaryCondition::Dirichlet) => Axis1Basis::Dirichlet,
                _ => Axis1Basis::Neumann,
            };
            FastPoisson::separable(basis, (&sub, &diag, &sup), &shift, bc.singular())
        }
    };

    Ok(EllipticProblem { grid, bc, geom, matrix, precond, lambda, opts: GmresOptions::default() })
}

/// The constant-coefficient problem `Δψ = div X` (used by the projector).
pub fn poisson(grid: &Arc<Grid>, bc: BoundaryCondition) -> Result<EllipticProblem> {
    assemble_coefficients(&MatrixField::identity(grid), &ScalarField::zeros(grid), bc)
}

fn remove_mean(v: &mut [f64]) {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= m);
}

impl EllipticProblem {
    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn boundary_condition(&self) -> BoundaryCondition {
        self.bc
    }

    /// Smallest eigenvalue of the symmetric part of `A` over the nodes.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.opts.tol = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.opts.max_iter = max_iter;
        self
    }

    pub fn tolerance(&self) -> f64 {
        self.opts.tol
    }

    /// Discrete weak operator `K ψ` (`a(ψ, e_k)` for every node `k`).
    pub fn apply(&self, psi: &ScalarField) -> ScalarField {
        ScalarField::new(self.grid.clone(), self.matrix.apply(&psi.data))
    }

    /// Discrete load `Σ w F·∇e_k`.
    pub fn load(&self, flux: &VectorField) -> Vec<f64> {
        let [f0, f1] = to_frame_vector(&self.grid, flux);
        let mut out = vec![0.0; self.grid.len()];
        for f in &self.geom.faces {
            let val = interp(if f.axis == 0 { &f0 } else { &f1 }, &f.stencil);
            for (r, cr) in f.functional() {
                out[r as usize] += f.w * val * cr;
            }
        }
        out
    }

    /// Solve `div((A + Ã)∇ψ) = div(flux)`.
    pub fn solve(&self, flux: &VectorField) -> Result<EllipticSolution> {
        if !self.grid.compatible(flux.grid()) {
            return Err(SgError::Config("right-hand side lives on a different grid".into()));
        }
        let mut b = self.load(flux);
        let singular = self.bc.singular();
        let mut defect = 0.0;
        if singular {
            defect = b.iter().sum::<f64>() / b.len() as f64;
            remove_mean(&mut b);
        }
        let out = gmres(
            |x: &[f64]| self.matrix.apply(x),
            |r: &[f64]| self.precond.apply(r),
            &b,
            self.opts,
            |v: &mut [f64]| {
                if singular {
                    remove_mean(v)
                }
            },
        );
        if !out.converged {
            return Err(SgError::SolverDiverged { iterations: out.iterations, residual: out.residual });
        }
        let mut psi = ScalarField::new(self.grid.clone(), out.x);
        if singular {
            let m = psi.mean();
            psi.data.iter_mut().for_each(|v| *v -= m);
        }
        let grad_psi = gradient(&psi)?;
        let e2v = potential_weight(&self.grid, 2.0, 0.0);
        let velocity = scale_by(&e2v, &perp(&grad_psi)).scaled(-1.0);
        Ok(EllipticSolution {
            psi,
            grad_psi,
            velocity,
            residual: out.residual,
            iterations: out.iterations,
            residual_history: out.history,
            flux_l2: l2_norm(flux),
            compatibility_defect: defect,
        })
    }
}

/// Free-function form of [`EllipticProblem::solve`].
pub fn solve(prob: &EllipticProblem, rhs_div_of: &VectorField) -> Result<EllipticSolution> {
    prob.solve(rhs_div_of)
}

/// `λ‖∇ψ‖/‖F‖`, bounded by one (up to discretisation error) because the
/// first-order term does no work. Returns `0` for `F = 0`.
pub fn energy_bound_check(prob: &EllipticProblem, sol: &EllipticSolution) -> f64 {
    if sol.flux_l2 == 0.0 {
        return 0.0;
    }
    prob.lambda * l2_norm(&sol.grad_psi) / sol.flux_l2
}
