//! Grid-sampled scalar, vector and 2×2 matrix fields.
//!
//! Fields are immutable values once built; every operator returns a new one.
//! Components are stored separately (`x`/`y`, or `11, 12, 21, 22`).

use std::sync::Arc;

use super::mesh::Grid;
use crate::error::{Result, SgError};

/// Common behaviour of all field types: a grid plus `COMPONENTS` nodal arrays.
pub trait Field: Clone + Sized {
    const COMPONENTS: usize;

    fn grid(&self) -> &Arc<Grid>;
    fn components(&self) -> Vec<&[f64]>;
    fn components_mut(&mut self) -> Vec<&mut Vec<f64>>;
    fn from_components(grid: Arc<Grid>, comps: Vec<Vec<f64>>) -> Self;

    fn zeros(grid: &Arc<Grid>) -> Self {
        Self::from_components(grid.clone(), vec![vec![0.0; grid.len()]; Self::COMPONENTS])
    }

    /// Componentwise map producing a field of the same type.
    fn map_components<F>(&self, mut f: F) -> Self
    where
        F: FnMut(&[f64]) -> Vec<f64>,
    {
        let comps = self.components().into_iter().map(&mut f).collect();
        Self::from_components(self.grid().clone(), comps)
    }

    fn ensure_compatible(&self, other: &Self) -> Result<()> {
        if self.grid().compatible(other.grid()) {
            Ok(())
        } else {
            Err(SgError::Config("fields live on different grids".into()))
        }
    }

    /// `a·self + b·other`.
    fn lin_comb(&self, a: f64, other: &Self, b: f64) -> Self {
        let comps = self
            .components()
            .into_iter()
            .zip(other.components())
            .map(|(p, q)| p.iter().zip(q).map(|(u, v)| a * u + b * v).collect())
            .collect();
        Self::from_components(self.grid().clone(), comps)
    }

    /// `self += a·other`, in place.
    fn axpy(&mut self, a: f64, other: &Self) {
        let src: Vec<Vec<f64>> = other.components().into_iter().map(|c| c.to_vec()).collect();
        for (dst, s) in self.components_mut().into_iter().zip(src) {
            for (d, v) in dst.iter_mut().zip(s) {
                *d += a * v;
            }
        }
    }

    fn scaled(&self, a: f64) -> Self {
        self.map_components(|c| c.iter().map(|v| a * v).collect())
    }

    fn max_abs(&self) -> f64 {
        self.components()
            .into_iter()
            .flat_map(|c| c.iter())
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Node-interleaved copy of the samples (`[c0, c1, ...]` per node).
    fn interleaved(&self) -> Vec<f64> {
        let comps = self.components();
        let len = self.grid().len();
        let mut out = Vec::with_capacity(len * comps.len());
        for k in 0..len {
            for c in &comps {
                out.push(c[k]);
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: Arc<Grid>,
    pub data: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Arc<Grid>, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), grid.len(), "scalar field size mismatch");
        Self { grid, data }
    }

    pub fn from_fn<F: Fn(f64, f64) -> f64>(grid: &Arc<Grid>, f: F) -> Self {
        let data = (0..grid.len())
            .map(|k| {
                let (x, y) = grid.coords(k);
                f(x, y)
            })
            .collect();
        Self::new(grid.clone(), data)
    }

    pub fn constant(grid: &Arc<Grid>, c: f64) -> Self {
        Self::new(grid.clone(), vec![c; grid.len()])
    }

    /// Weighted mean over the domain.
    pub fn mean(&self) -> f64 {
        let w = self.grid.weights();
        self.data.iter().zip(w).map(|(v, w)| v * w).sum::<f64>() / self.grid.area()
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (k, v) in self.data.iter().enumerate() {
            if *v > self.data[best] {
                best = k;
            }
        }
        best
    }
}

impl Field for ScalarField {
    const COMPONENTS: usize = 1;

    fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    fn components(&self) -> Vec<&[f64]> {
        vec![&self.data]
    }

    fn components_mut(&mut self) -> Vec<&mut Vec<f64>> {
        vec![&mut self.data]
    }

    fn from_components(grid: Arc<Grid>, mut comps: Vec<Vec<f64>>) -> Self {
        Self::new(grid, comps.remove(0))
    }
}

#[derive(Debug, Clone)]
pub struct VectorField {
    grid: Arc<Grid>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl VectorField {
    pub fn new(grid: Arc<Grid>, x: Vec<f64>, y: Vec<f64>) -> Self {
        assert!(x.len() == grid.len() && y.len() == grid.len(), "vector field size mismatch");
        Self { grid, x, y }
    }

    pub fn from_fn<F: Fn(f64, f64) -> [f64; 2]>(grid: &Arc<Grid>, f: F) -> Self {
        let mut x = vec![0.0; grid.len()];
        let mut y = vec![0.0; grid.len()];
        for k in 0..grid.len() {
            let (px, py) = grid.coords(k);
            let v = f(px, py);
            x[k] = v[0];
            y[k] = v[1];
        }
        Self::new(grid.clone(), x, y)
    }

    pub fn constant(grid: &Arc<Grid>, v: [f64; 2]) -> Self {
        Self::new(grid.clone(), vec![v[0]; grid.len()], vec![v[1]; grid.len()])
    }

    #[inline]
    pub fn at(&self, k: usize) -> [f64; 2] {
        [self.x[k], self.y[k]]
    }

    /// Weighted mean of each component.
    pub fn mean(&self) -> [f64; 2] {
        let w = self.grid.weights();
        let a = self.grid.area();
        let mx = self.x.iter().zip(w).map(|(v, w)| v * w).sum::<f64>() / a;
        let my = self.y.iter().zip(w).map(|(v, w)| v * w).sum::<f64>() / a;
        [mx, my]
    }
}

impl Field for VectorField {
    const COMPONENTS: usize = 2;

    fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    fn components(&self) -> Vec<&[f64]> {
        vec![&self.x, &self.y]
    }

    fn components_mut(&mut self) -> Vec<&mut Vec<f64>> {
        vec![&mut self.x, &mut self.y]
    }

    fn from_components(grid: Arc<Grid>, mut comps: Vec<Vec<f64>>) -> Self {
        let y = comps.remove(1);
        let x = comps.remove(0);
        Self::new(grid, x, y)
    }
}

/// 2×2 matrix field stored as `[m11, m12, m21, m22]` component arrays.
#[derive(Debug, Clone)]
pub struct MatrixField {
    grid: Arc<Grid>,
    pub m: [Vec<f64>; 4],
}

impl MatrixField {
    pub fn new(grid: Arc<Grid>, m: [Vec<f64>; 4]) -> Self {
        assert!(m.iter().all(|c| c.len() == grid.len()), "matrix field size mismatch");
        Self { grid, m }
    }

    pub fn from_fn<F: Fn(f64, f64) -> [[f64; 2]; 2]>(grid: &Arc<Grid>, f: F) -> Self {
        let len = grid.len();
        let mut m = [vec![0.0; len], vec![0.0; len], vec![0.0; len], vec![0.0; len]];
        for k in 0..len {
            let (x, y) = grid.coords(k);
            let a = f(x, y);
            m[0][k] = a[0][0];
            m[1][k] = a[0][1];
            m[2][k] = a[1][0];
            m[3][k] = a[1][1];
        }
        Self::new(grid.clone(), m)
    }

    pub fn identity(grid: &Arc<Grid>) -> Self {
        let len = grid.len();
        Self::new(grid.clone(), [vec![1.0; len], vec![0.0; len], vec![0.0; len], vec![1.0; len]])
    }

    #[inline]
    pub fn at(&self, k: usize) -> [[f64; 2]; 2] {
        [[self.m[0][k], self.m[1][k]], [self.m[2][k], self.m[3][k]]]
    }

    pub fn transpose(&self) -> Self {
        Self::new(
            self.grid.clone(),
            [self.m[0].clone(), self.m[2].clone(), self.m[1].clone(), self.m[3].clone()],
        )
    }

    /// Symmetric part `(M + Mᵀ)/2`.
    pub fn symmetric_part(&self) -> Self {
        let off: Vec<f64> = self.m[1].iter().zip(&self.m[2]).map(|(a, b)| 0.5 * (a + b)).collect();
        Self::new(self.grid.clone(), [self.m[0].clone(), off.clone(), off, self.m[3].clone()])
    }

    /// Largest `|m12 - m21|` over the grid.
    pub fn max_asymmetry(&self) -> f64 {
        self.m[1].iter().zip(&self.m[2]).fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()))
    }

    /// Pointwise product `M v`.
    pub fn apply(&self, v: &VectorField) -> VectorField {
        let len = self.grid.len();
        let mut x = vec![0.0; len];
        let mut y = vec![0.0; len];
        for k in 0..len {
            x[k] = self.m[0][k] * v.x[k] + self.m[1][k] * v.y[k];
            y[k] = self.m[2][k] * v.x[k] + self.m[3][k] * v.y[k];
        }
        VectorField::new(self.grid.clone(), x, y)
    }
}

impl Field for MatrixField {
    const COMPONENTS: usize = 4;

    fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    fn components(&self) -> Vec<&[f64]> {
        self.m.iter().map(|c| c.as_slice()).collect()
    }

    fn components_mut(&mut self) -> Vec<&mut Vec<f64>> {
        self.m.iter_mut().collect()
    }

    fn from_components(grid: Arc<Grid>, comps: Vec<Vec<f64>>) -> Self {
        let m: [Vec<f64>; 4] = comps.try_into().expect("matrix fields have four components");
        Self::new(grid, m)
    }
}
