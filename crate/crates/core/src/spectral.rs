//! Fourier differentiation, quadrature and dealiased nonlinear products.
//!
//! Odd-order derivatives discard the Nyquist bin in the differentiated
//! direction. Nonlinear expressions are evaluated on a grid padded to 3/2 the
//! resolution and truncated back to `|m| < N/2`, which removes quadratic
//! aliasing exactly.

use rustfft::num_complex::Complex64;

use crate::field::SurfaceField;
use crate::grid::{fft2_in_place, signed_index, PeriodicGrid};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Fourier coefficients `c` with `f(x) = sum c_k e^{i k.x}`, in FFT bin order.
pub fn forward(grid: &PeriodicGrid, f: &SurfaceField) -> Vec<Complex64> {
    let (nx, ny) = grid.shape();
    let p = grid.plans();
    let mut buf: Vec<Complex64> = f
        .as_slice()
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    fft2_in_place(&mut buf, nx, ny, p.fwd_x.as_ref(), p.fwd_y.as_ref());
    let norm = 1.0 / (nx * ny) as f64;
    for c in &mut buf {
        *c *= norm;
    }
    buf
}

/// Real part of the nodal synthesis of coefficients produced by [`forward`].
pub fn inverse(grid: &PeriodicGrid, mut coef: Vec<Complex64>) -> SurfaceField {
    let (nx, ny) = grid.shape();
    let p = grid.plans();
    fft2_in_place(&mut coef, nx, ny, p.inv_x.as_ref(), p.inv_y.as_ref());
    SurfaceField::from_vec(grid, coef.into_iter().map(|c| c.re).collect()).expect("shape preserved")
}

/// Spectral `(d/dx, d/dy)` of a nodal field.
pub fn spectral_gradient(grid: &PeriodicGrid, f: &SurfaceField) -> (SurfaceField, SurfaceField) {
    let c = forward(grid, f);
    (
        inverse(grid, apply_symbol(grid, &c, DerivX)),
        inverse(grid, apply_symbol(grid, &c, DerivY)),
    )
}

/// Spectral divergence of the vector field `(u, v)`.
pub fn spectral_divergence(
    grid: &PeriodicGrid,
    u: &SurfaceField,
    v: &SurfaceField,
) -> SurfaceField {
    let cu = apply_symbol(grid, &forward(grid, u), DerivX);
    let cv = apply_symbol(grid, &forward(grid, v), DerivY);
    inverse(grid, cu.into_iter().zip(cv).map(|(a, b)| a + b).collect())
}

/// Spectral Laplacian; keeps the Nyquist bins since the operator is even.
pub fn spectral_laplacian(grid: &PeriodicGrid, f: &SurfaceField) -> SurfaceField {
    let mut c = forward(grid, f);
    let ny = grid.ny();
    for (idx, v) in c.iter_mut().enumerate() {
        let (kx, ky) = (grid.kx(idx / ny), grid.ky(idx % ny));
        *v *= -(kx * kx + ky * ky);
    }
    inverse(grid, c)
}

#[derive(Clone, Copy)]
enum Symbol {
    DerivX,
    DerivY,
}
use Symbol::{DerivX, DerivY};

fn apply_symbol(grid: &PeriodicGrid, c: &[Complex64], s: Symbol) -> Vec<Complex64> {
    let ny = grid.ny();
    c.iter()
        .enumerate()
        .map(|(idx, &v)| {
            let (i, l) = (idx / ny, idx % ny);
            match s {
                DerivX if grid.is_nyquist_x(i) => ZERO,
                DerivY if grid.is_nyquist_y(l) => ZERO,
                DerivX => v * Complex64::new(0.0, grid.kx(i)),
                DerivY => v * Complex64::new(0.0, grid.ky(l)),
            }
        })
        .collect()
}

/// Rectangle-rule integral over the periodic box.
pub fn integrate_surface(grid: &PeriodicGrid, f: &SurfaceField) -> f64 {
    f.as_slice().iter().sum::<f64>() * grid.cell_area()
}

/// Discrete `L2` norm `sqrt(sum f^2 dA)`.
pub fn l2_norm(grid: &PeriodicGrid, f: &SurfaceField) -> f64 {
    (f.as_slice().iter().map(|v| v * v).sum::<f64>() * grid.cell_area()).sqrt()
}

/// Dealiased pointwise product `a * b`.
pub fn dealiased_product(grid: &PeriodicGrid, a: &SurfaceField, b: &SurfaceField) -> SurfaceField {
    dealiased_map(grid, &[a, b], |v| v[0] * v[1])
}

/// Evaluates `f` pointwise on the 3/2-padded interpolants of `inputs` and
/// truncates the result back to the retained band `|m| < N/2`.
pub fn dealiased_map(
    grid: &PeriodicGrid,
    inputs: &[&SurfaceField],
    f: impl Fn(&[f64]) -> f64,
) -> SurfaceField {
    let padded: Vec<Vec<f64>> = inputs.iter().map(|u| pad(grid, u)).collect();
    let (px, py) = grid.padded_shape();
    let mut args = vec![0.0; inputs.len()];
    let values: Vec<f64> = (0..px * py)
        .map(|n| {
            for (a, p) in args.iter_mut().zip(&padded) {
                *a = p[n];
            }
            f(&args)
        })
        .collect();
    truncate(grid, values)
}

/// Nodal values of the band-limited interpolant of `u` on the padded grid.
fn pad(grid: &PeriodicGrid, u: &SurfaceField) -> Vec<f64> {
    let (nx, ny) = grid.shape();
    let (px, py) = grid.padded_shape();
    let c = forward(grid, u);
    let mut buf = vec![ZERO; px * py];
    for i in 0..nx {
        let m = signed_index(i, nx);
        // A Nyquist bin is split evenly between +-N/2 so the interpolant stays real.
        let xs: &[(i64, f64)] = if grid.is_nyquist_x(i) {
            &[(m, 0.5), (-m, 0.5)]
        } else {
            &[(m, 1.0)]
        };
        for l in 0..ny {
            let n = signed_index(l, ny);
            let ys: &[(i64, f64)] = if grid.is_nyquist_y(l) {
                &[(n, 0.5), (-n, 0.5)]
            } else {
                &[(n, 1.0)]
            };
            let v = c[i * ny + l];
            for &(mm, wx) in xs {
                for &(nn, wy) in ys {
                    let pi = mm.rem_euclid(px as i64) as usize;
                    let pl = nn.rem_euclid(py as i64) as usize;
                    buf[pi * py + pl] += v * (wx * wy);
                }
            }
        }
    }
    let p = grid.plans();
    fft2_in_place(&mut buf, px, py, p.pad_inv_x.as_ref(), p.pad_inv_y.as_ref());
    buf.into_iter().map(|c| c.re).collect()
}

fn truncate(grid: &PeriodicGrid, values: Vec<f64>) -> SurfaceField {
    let (nx, ny) = grid.shape();
    let (px, py) = grid.padded_shape();
    let p = grid.plans();
    let mut buf: Vec<Complex64> = values.into_iter().map(|v| Complex64::new(v, 0.0)).collect();
    fft2_in_place(&mut buf, px, py, p.pad_fwd_x.as_ref(), p.pad_fwd_y.as_ref());
    let norm = 1.0 / (px * py) as f64;
    let mut c = vec![ZERO; nx * ny];
    for i in 0..nx {
        if grid.is_nyquist_x(i) {
            continue;
        }
        let pi = signed_index(i, nx).rem_euclid(px as i64) as usize;
        for l in 0..ny {
            if grid.is_nyquist_y(l) {
                continue;
            }
            let pl = signed_index(l, ny).rem_euclid(py as i64) as usize;
            c[i * ny + l] = buf[pi * py + pl] * norm;
        }
    }
    inverse(grid, c)
}
