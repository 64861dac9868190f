//! Doubly periodic collocation grid over a flat-bottomed fluid layer.
//!
//! Nodes sit at `(j Lx/Nx, l Ly/Ny)` for `j < Nx`, `l < Ny`. Fields are stored
//! row-major with `j` as the row index, so node `(j, l)` lives at `j * Ny + l`.
//! Lattice indices run over `[-N/2, N/2)` in each direction.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical and numerical parameters of a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridParams {
    pub lx: f64,
    pub ly: f64,
    pub nx: usize,
    pub ny: usize,
    pub depth: f64,
    pub gravity: f64,
    pub density: f64,
    #[serde(default)]
    pub surface_tension: f64,
}

impl Default for GridParams {
    fn default() -> Self {
        Self {
            lx: 2.0 * PI,
            ly: 2.0 * PI,
            nx: 32,
            ny: 32,
            depth: 1.0,
            gravity: 9.81,
            density: 1000.0,
            surface_tension: 0.0,
        }
    }
}

pub(crate) struct FftPlans {
    pub fwd_x: Arc<dyn Fft<f64>>,
    pub inv_x: Arc<dyn Fft<f64>>,
    pub fwd_y: Arc<dyn Fft<f64>>,
    pub inv_y: Arc<dyn Fft<f64>>,
    pub pad_fwd_x: Arc<dyn Fft<f64>>,
    pub pad_inv_x: Arc<dyn Fft<f64>>,
    pub pad_fwd_y: Arc<dyn Fft<f64>>,
    pub pad_inv_y: Arc<dyn Fft<f64>>,
}

/// Immutable grid description with cached transform plans.
#[derive(Clone)]
pub struct PeriodicGrid {
    params: GridParams,
    plans: Arc<FftPlans>,
}

impl fmt::Debug for PeriodicGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PeriodicGrid")
            .field("params", &self.params)
            .finish()
    }
}

impl PartialEq for PeriodicGrid {
    fn eq(&self, other: &Self) -> bool {
        self.params == other.params
    }
}

/// Validates parameters and builds the grid.
pub fn make_grid(params: GridParams) -> Result<PeriodicGrid> {
    let GridParams {
        lx,
        ly,
        nx,
        ny,
        depth,
        gravity,
        density,
        surface_tension,
    } = params;
    let bad = |msg: String| Err(Error::InvalidGrid(msg));
    if !(lx.is_finite() && lx > 0.0 && ly.is_finite() && ly > 0.0) {
        return bad(format!("box lengths must be positive, got ({lx}, {ly})"));
    }
    for (name, n) in [("nx", nx), ("ny", ny)] {
        if n < 4 || n % 2 != 0 {
            return bad(format!("{name} must be even and at least 4, got {n}"));
        }
    }
    if !(depth.is_finite() && depth > 0.0) {
        return bad(format!("depth must be positive, got {depth}"));
    }
    if !(gravity.is_finite() && gravity > 0.0) {
        return bad(format!("gravity must be positive, got {gravity}"));
    }
    if !(density.is_finite() && density > 0.0) {
        return bad(format!("density must be positive, got {density}"));
    }
    if !(surface_tension.is_finite() && surface_tension >= 0.0) {
        return bad(format!(
            "surface tension must be non-negative, got {surface_tension}"
        ));
    }
    let mut planner = FftPlanner::new();
    let (px, py) = (3 * nx / 2, 3 * ny / 2);
    let plans = FftPlans {
        fwd_x: planner.plan_fft_forward(nx),
        inv_x: planner.plan_fft_inverse(nx),
        fwd_y: planner.plan_fft_forward(ny),
        inv_y: planner.plan_fft_inverse(ny),
        pad_fwd_x: planner.plan_fft_forward(px),
        pad_inv_x: planner.plan_fft_inverse(px),
        pad_fwd_y: planner.plan_fft_forward(py),
        pad_inv_y: planner.plan_fft_inverse(py),
    };
    Ok(PeriodicGrid {
        params,
        plans: Arc::new(plans),
    })
}

/// Signed lattice index for FFT bin `i` of an `n`-point transform.
#[inline]
pub fn signed_index(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

impl PeriodicGrid {
    pub fn params(&self) -> &GridParams {
        &self.params
    }
    pub fn lx(&self) -> f64 {
        self.params.lx
    }
    pub fn ly(&self) -> f64 {
        self.params.ly
    }
    pub fn nx(&self) -> usize {
        self.params.nx
    }
    pub fn ny(&self) -> usize {
        self.params.ny
    }
    pub fn depth(&self) -> f64 {
        self.params.depth
    }
    pub fn gravity(&self) -> f64 {
        self.params.gravity
    }
    pub fn density(&self) -> f64 {
        self.params.density
    }
    pub fn surface_tension(&self) -> f64 {
        self.params.surface_tension
    }
    /// Kinematic surface tension `sigma / rho`.
    pub fn capillarity(&self) -> f64 {
        self.params.surface_tension / self.params.density
    }
    pub fn len(&self) -> usize {
        self.params.nx * self.params.ny
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
    pub fn shape(&self) -> (usize, usize) {
        (self.params.nx, self.params.ny)
    }
    pub fn area(&self) -> f64 {
        self.params.lx * self.params.ly
    }
    pub fn dx(&self) -> f64 {
        self.params.lx / self.params.nx as f64
    }
    pub fn dy(&self) -> f64 {
        self.params.ly / self.params.ny as f64
    }
    /// Quadrature weight of one node.
    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dy()
    }
    #[inline]
    pub fn index(&self, j: usize, l: usize) -> usize {
        j * self.params.ny + l
    }
    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.dx()
    }
    pub fn y(&self, l: usize) -> f64 {
        l as f64 * self.dy()
    }

    /// Box-centred coordinate `x - Lx/2`, with the seam node `j = 0` mapped to 0.
    pub fn centred_x(&self, j: usize) -> f64 {
        centred(j, self.params.nx, self.params.lx)
    }
    /// Box-centred coordinate `y - Ly/2`, with the seam node `l = 0` mapped to 0.
    pub fn centred_y(&self, l: usize) -> f64 {
        centred(l, self.params.ny, self.params.ly)
    }

    /// Wavenumber `2 pi m / Lx` for FFT bin `i`.
    pub fn kx(&self, i: usize) -> f64 {
        2.0 * PI * signed_index(i, self.params.nx) as f64 / self.params.lx
    }
    /// Wavenumber `2 pi n / Ly` for FFT bin `i`.
    pub fn ky(&self, i: usize) -> f64 {
        2.0 * PI * signed_index(i, self.params.ny) as f64 / self.params.ly
    }
    pub fn is_nyquist_x(&self, i: usize) -> bool {
        i == self.params.nx / 2
    }
    pub fn is_nyquist_y(&self, i: usize) -> bool {
        i == self.params.ny / 2
    }

    pub(crate) fn plans(&self) -> &FftPlans {
        &self.plans
    }
    pub(crate) fn padded_shape(&self) -> (usize, usize) {
        (3 * self.params.nx / 2, 3 * self.params.ny / 2)
    }
}

fn centred(j: usize, n: usize, len: f64) -> f64 {
    if j == 0 {
        0.0
    } else {
        j as f64 * len / n as f64 - 0.5 * len
    }
}

/// Unnormalised complex 2-D transform in place over an `n0 x n1` row-major buffer.
pub(crate) fn fft2_in_place(
    buf: &mut [Complex64],
    n0: usize,
    n1: usize,
    along0: &dyn Fft<f64>,
    along1: &dyn Fft<f64>,
) {
    for row in buf.chunks_exact_mut(n1) {
        along1.process(row);
    }
    let mut col = vec![Complex64::new(0.0, 0.0); n0];
    for c in 0..n1 {
        for r in 0..n0 {
            col[r] = buf[r * n1 + c];
        }
        along0.process(&mut col);
        for r in 0..n0 {
            buf[r * n1 + c] = col[r];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_odd_or_tiny_resolution() {
        for (nx, ny) in [(31, 32), (32, 2), (0, 8)] {
            let p = GridParams {
                nx,
                ny,
                ..GridParams::default()
            };
            assert!(matches!(make_grid(p), Err(Error::InvalidGrid(_))));
        }
    }

    #[test]
    fn rejects_nonpositive_physics() {
        let base = GridParams::default();
        for p in [
            GridParams { depth: 0.0, ..base },
            GridParams {
                gravity: -1.0,
                ..base
            },
            GridParams {
                density: 0.0,
                ..base
            },
            GridParams {
                surface_tension: -1e-3,
                ..base
            },
            GridParams {
                lx: f64::NAN,
                ..base
            },
        ] {
            assert!(make_grid(p).is_err());
        }
    }

    #[test]
    fn lattice_is_half_open() {
        let idx: Vec<i64> = (0..8).map(|i| signed_index(i, 8)).collect();
        assert_eq!(idx, vec![0, 1, 2, 3, -4, -3, -2, -1]);
    }

    #[test]
    fn centred_coordinates_are_odd() {
        let g = make_grid(GridParams {
            nx: 8,
            ny: 6,
            ..GridParams::default()
        })
        .unwrap();
        let sx: f64 = (0..8).map(|j| g.centred_x(j)).sum();
        let sy: f64 = (0..6).map(|l| g.centred_y(l)).sum();
        assert!(sx.abs() < 1e-12 && sy.abs() < 1e-12);
        assert!((g.centred_x(4)).abs() < 1e-15);
        assert!((g.centred_x(1) + g.centred_x(7)).abs() < 1e-14);
    }
}
