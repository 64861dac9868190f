//! Nodal surface fields and the prognostic state `(eta, q, t)`.

use crate::error::{Error, Result};
use crate::grid::PeriodicGrid;

/// Real samples of a doubly periodic function at the grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceField {
    nx: usize,
    ny: usize,
    data: Vec<f64>,
}

impl SurfaceField {
    pub fn zeros(grid: &PeriodicGrid) -> Self {
        Self {
            nx: grid.nx(),
            ny: grid.ny(),
            data: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: &PeriodicGrid, value: f64) -> Self {
        Self {
            nx: grid.nx(),
            ny: grid.ny(),
            data: vec![value; grid.len()],
        }
    }

    /// Samples `f(x, y)` at the grid nodes.
    pub fn from_fn(grid: &PeriodicGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut data = Vec::with_capacity(grid.len());
        for j in 0..grid.nx() {
            let x = grid.x(j);
            for l in 0..grid.ny() {
                data.push(f(x, grid.y(l)));
            }
        }
        Self {
            nx: grid.nx(),
            ny: grid.ny(),
            data,
        }
    }

    /// Samples `f(j, l)` over node indices.
    pub fn from_index_fn(grid: &PeriodicGrid, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(grid.len());
        for j in 0..grid.nx() {
            for l in 0..grid.ny() {
                data.push(f(j, l));
            }
        }
        Self {
            nx: grid.nx(),
            ny: grid.ny(),
            data,
        }
    }

    pub fn from_vec(grid: &PeriodicGrid, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::ShapeMismatch {
                expected: grid.shape(),
                got: (data.len(), 1),
            });
        }
        Ok(Self {
            nx: grid.nx(),
            ny: grid.ny(),
            data,
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }
    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }
    #[inline]
    pub fn get(&self, j: usize, l: usize) -> f64 {
        self.data[j * self.ny + l]
    }

    pub fn check_grid(&self, grid: &PeriodicGrid) -> Result<()> {
        if self.shape() != grid.shape() {
            return Err(Error::ShapeMismatch {
                expected: grid.shape(),
                got: self.shape(),
            });
        }
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }
    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Pointwise map.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            nx: self.nx,
            ny: self.ny,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise combination of two fields of equal shape.
    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.shape(), other.shape());
        Self {
            nx: self.nx,
            ny: self.ny,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: f64, other: &Self) -> Self {
        self.zip_map(other, |u, v| u + a * v)
    }

    pub fn scale(&self, a: f64) -> Self {
        self.map(|v| a * v)
    }

    /// Swaps the roles of `x` and `y`; requires a square node layout.
    pub fn transposed(&self) -> Self {
        let mut data = vec![0.0; self.data.len()];
        for j in 0..self.nx {
            for l in 0..self.ny {
                data[l * self.nx + j] = self.data[j * self.ny + l];
            }
        }
        Self {
            nx: self.ny,
            ny: self.nx,
            data,
        }
    }
}

/// Prognostic variables: elevation `eta`, surface potential `q`, and time.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceState {
    pub eta: SurfaceField,
    pub q: SurfaceField,
    pub t: f64,
}

impl SurfaceState {
    pub fn new(eta: SurfaceField, q: SurfaceField, t: f64) -> Self {
        Self { eta, q, t }
    }

    pub fn check_grid(&self, grid: &PeriodicGrid) -> Result<()> {
        self.eta.check_grid(grid)?;
        self.q.check_grid(grid)
    }

    /// Mirror image under `x <-> y`.
    pub fn transposed(&self) -> Self {
        Self {
            eta: self.eta.transposed(),
            q: self.q.transposed(),
            t: self.t,
        }
    }
}
