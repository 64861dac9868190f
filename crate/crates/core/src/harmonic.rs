//! Harmonic extension of surface data into the fluid layer.
//!
//! The potential is expanded in bed-compatible modes
//! `cosh(|k|(z+h)) / cosh(|k|(h + max eta))` times the real Fourier basis of
//! the lattice, and fitted by collocation at the surface nodes.

use std::sync::{Arc, OnceLock};

use faer::Mat;

use crate::error::{Error, Result};
use crate::field::SurfaceField;
use crate::grid::PeriodicGrid;
use crate::linalg::DenseLu;
use crate::spectral::spectral_gradient;

/// Largest admissible `|k| (h + max eta)`.
pub const EXPONENT_CAP: f64 = 700.0;

/// One lattice wave vector representing the pair `{k, -k}`.
#[derive(Debug, Clone, Copy)]
pub struct Wave {
    pub bin_x: usize,
    pub bin_y: usize,
    pub kx: f64,
    pub ky: f64,
    pub kabs: f64,
    /// `kx` with the Nyquist bin zeroed, used for `d/dx`.
    pub dkx: f64,
    /// `ky` with the Nyquist bin zeroed, used for `d/dy`.
    pub dky: f64,
    pub col_cos: usize,
    /// Index of `kabs` in [`ModalBasis::levels`].
    pub level: usize,
    /// Absent when `k` and `-k` coincide on the lattice.
    pub col_sin: Option<usize>,
}

/// Real trigonometric basis of the lattice with node tables.
#[derive(Debug, Clone)]
pub struct ModalBasis {
    pub waves: Vec<Wave>,
    /// Distinct values of `|k|`, ascending.
    pub levels: Vec<f64>,
    nx: usize,
    ny: usize,
    cx: Vec<f64>,
    sx: Vec<f64>,
    cy: Vec<f64>,
    sy: Vec<f64>,
}

impl ModalBasis {
    pub fn new(grid: &PeriodicGrid) -> Self {
        let (nx, ny) = grid.shape();
        let mut waves = Vec::new();
        let mut col = 0;
        for i in 0..nx {
            for l in 0..ny {
                let partner = ((nx - i) % nx, (ny - l) % ny);
                if partner < (i, l) {
                    continue;
                }
                let (kx, ky) = (grid.kx(i), grid.ky(l));
                let col_cos = col;
                col += 1;
                let col_sin = if partner == (i, l) {
                    None
                } else {
                    col += 1;
                    Some(col - 1)
                };
                waves.push(Wave {
                    bin_x: i,
                    bin_y: l,
                    kx,
                    ky,
                    kabs: kx.hypot(ky),
                    dkx: if grid.is_nyquist_x(i) { 0.0 } else { kx },
                    dky: if grid.is_nyquist_y(l) { 0.0 } else { ky },
                    col_cos,
                    level: 0,
                    col_sin,
                });
            }
        }
        debug_assert_eq!(col, nx * ny);
        let mut levels: Vec<f64> = waves.iter().map(|w| w.kabs).collect();
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        for w in &mut waves {
            w.level = levels.partition_point(|&k| k < w.kabs);
        }
        let table =
            |n: usize, k: &dyn Fn(usize) -> f64, x: &dyn Fn(usize) -> f64, f: fn(f64) -> f64| {
                let mut t = vec![0.0; n * n];
                for i in 0..n {
                    for j in 0..n {
                        t[i * n + j] = f(k(i) * x(j));
                    }
                }
                t
            };
        let kx = |i| grid.kx(i);
        let ky = |i| grid.ky(i);
        let x = |j| grid.x(j);
        let y = |j| grid.y(j);
        Self {
            cx: table(nx, &kx, &x, f64::cos),
            sx: table(nx, &kx, &x, f64::sin),
            cy: table(ny, &ky, &y, f64::cos),
            sy: table(ny, &ky, &y, f64::sin),
            waves,
            levels,
            nx,
            ny,
        }
    }

    /// Scaled vertical profiles of every `|k|` level at heights `z`.
    pub fn profiles(&self, z: &[f64], depth: f64, zref: f64) -> ProfileTable {
        let n = z.len();
        let mut ch = vec![0.0; self.levels.len() * n];
        let mut sh = vec![0.0; self.levels.len() * n];
        for (i, &k) in self.levels.iter().enumerate() {
            let inv = inverse_scale(k, zref + depth);
            for (m, &zm) in z.iter().enumerate() {
                let (c, s) = scaled_profile(k, zm + depth, inv);
                ch[i * n + m] = c;
                sh[i * n + m] = s;
            }
        }
        ProfileTable { n, ch, sh }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(cos, sin)` of `k . x` at node `(j, l)`.
    #[inline]
    pub fn trig(&self, w: &Wave, j: usize, l: usize) -> (f64, f64) {
        let (cx, sx) = (
            self.cx[w.bin_x * self.nx + j],
            self.sx[w.bin_x * self.nx + j],
        );
        let (cy, sy) = (
            self.cy[w.bin_y * self.ny + l],
            self.sy[w.bin_y * self.ny + l],
        );
        (cx * cy - sx * sy, sx * cy + cx * sy)
    }
}

/// Vertical profiles tabulated per `|k|` level and node.
#[derive(Debug, Clone)]
pub struct ProfileTable {
    n: usize,
    ch: Vec<f64>,
    sh: Vec<f64>,
}

impl ProfileTable {
    /// `cosh` profiles of wave `w` at every node.
    #[inline]
    pub fn cosh(&self, w: &Wave) -> &[f64] {
        &self.ch[w.level * self.n..(w.level + 1) * self.n]
    }

    /// `sinh` profiles of wave `w` at every node.
    #[inline]
    pub fn sinh(&self, w: &Wave) -> &[f64] {
        &self.sh[w.level * self.n..(w.level + 1) * self.n]
    }
}

/// `cosh(|k|(z+h)) / cosh(|k|(h+zref))` and the matching `sinh` ratio.
#[inline]
pub fn vertical_profile(kabs: f64, z: f64, depth: f64, zref: f64) -> (f64, f64) {
    scaled_profile(kabs, z + depth, inverse_scale(kabs, zref + depth))
}

/// `1 / cosh(|k| H)`; finite for exponents under [`EXPONENT_CAP`].
#[inline]
pub(crate) fn inverse_scale(kabs: f64, height: f64) -> f64 {
    1.0 / (kabs * height).cosh()
}

/// `(cosh(|k| d), sinh(|k| d))` times `inv_scale`, with one exponential.
#[inline]
pub(crate) fn scaled_profile(kabs: f64, d: f64, inv_scale: f64) -> (f64, f64) {
    if kabs == 0.0 {
        return (1.0, 0.0);
    }
    let e = (kabs * d).exp();
    let r = 1.0 / e;
    (0.5 * (e + r) * inv_scale, 0.5 * (e - r) * inv_scale)
}

/// Checks the modal exponent against [`EXPONENT_CAP`] for reference height `zref`.
pub fn check_exponent(grid: &PeriodicGrid, basis: &ModalBasis, zref: f64) -> Result<()> {
    let kmax = basis.waves.iter().fold(0.0f64, |m, w| m.max(w.kabs));
    let exponent = kmax * (grid.depth() + zref);
    if !(exponent <= EXPONENT_CAP) {
        return Err(Error::ExponentOverflow {
            exponent,
            cap: EXPONENT_CAP,
        });
    }
    Ok(())
}

/// Harmonic potential in the layer `-h < z < eta`.
#[derive(Debug, Clone)]
pub struct ModalPotential {
    /// Coefficients over the real basis columns of [`ModalBasis`].
    pub coeffs: Vec<f64>,
    /// Reference height of the scale factors, `max eta` of the fitted surface.
    pub zref: f64,
    /// Estimated 1-norm condition number of the collocation matrix, or NaN
    /// when it was not requested.
    pub condition: f64,
    /// `max |A c - d| / max |d|` at the collocation nodes.
    pub residual: f64,
}

/// Largest number of refinement sweeps against a borrowed factorization.
const MAX_REFINEMENT_SWEEPS: usize = 30;

/// Surface collocation matrix with a factorization of it, or of a nearby
/// matrix used to drive iterative refinement.
#[derive(Debug)]
pub struct CollocationFit {
    basis: ModalBasis,
    profiles: ProfileTable,
    matrix: Mat<f64>,
    /// Factorization of `matrix` when `exact`, else of a nearby matrix.
    lu: Arc<DenseLu>,
    exact: bool,
    /// Factorization of `matrix` when the borrowed one is not enough; the
    /// error case keeps the pivot ratio.
    own: OnceLock<std::result::Result<Arc<DenseLu>, f64>>,
    zref: f64,
    condition: OnceLock<f64>,
    transpose_condition: OnceLock<f64>,
}

impl CollocationFit {
    /// Assembles and factors the collocation matrix of `eta`.
    pub fn new(grid: &PeriodicGrid, eta: &SurfaceField) -> Result<Self> {
        let (basis, profiles, matrix, zref) = assemble(grid, eta)?;
        let lu = Arc::new(DenseLu::factor(matrix.as_ref(), "collocation")?);
        Ok(Self {
            basis,
            profiles,
            matrix,
            lu,
            exact: true,
            own: OnceLock::new(),
            zref,
            condition: OnceLock::new(),
            transpose_condition: OnceLock::new(),
        })
    }

    /// Assembles the collocation matrix of `eta` and solves with it by
    /// iterative refinement against the factorization held by `near`.
    ///
    /// Falls back to a fresh factorization when refinement stalls.
    pub fn refined_from(
        grid: &PeriodicGrid,
        eta: &SurfaceField,
        near: &CollocationFit,
    ) -> Result<Self> {
        let (basis, profiles, matrix, zref) = assemble(grid, eta)?;
        if matrix.nrows() != near.matrix.nrows() {
            return Err(Error::ShapeMismatch {
                expected: (near.matrix.nrows(), 1),
                got: (matrix.nrows(), 1),
            });
        }
        Ok(Self {
            basis,
            profiles,
            matrix,
            lu: near.lu.clone(),
            exact: false,
            own: OnceLock::new(),
            zref,
            condition: OnceLock::new(),
            transpose_condition: OnceLock::new(),
        })
    }

    pub fn basis(&self) -> &ModalBasis {
        &self.basis
    }

    /// Vertical profiles at the surface nodes.
    pub fn profiles(&self) -> &ProfileTable {
        &self.profiles
    }

    /// `max eta`, the height at which the profiles are normalised.
    pub fn zref(&self) -> f64 {
        self.zref
    }

    /// Factorization of this matrix, computed on first use when borrowed.
    fn own_lu(&self) -> Result<Arc<DenseLu>> {
        if self.exact {
            return Ok(self.lu.clone());
        }
        self.own
            .get_or_init(|| {
                DenseLu::factor(self.matrix.as_ref(), "collocation")
                    .map(Arc::new)
                    .map_err(|e| match e {
                        Error::SingularSystem { pivot_ratio, .. } => pivot_ratio,
                        _ => f64::NAN,
                    })
            })
            .clone()
            .map_err(|pivot_ratio| Error::SingularSystem {
                system: "collocation",
                pivot_ratio,
            })
    }

    /// Estimated 1-norm condition number, computed on first use.
    pub fn condition(&self) -> f64 {
        *self.condition.get_or_init(|| {
            self.own_lu()
                .map_or(f64::INFINITY, |lu| lu.condition_estimate())
        })
    }

    /// Estimated 1-norm condition number of the transposed matrix.
    pub fn transpose_condition(&self) -> f64 {
        *self.transpose_condition.get_or_init(|| {
            self.own_lu()
                .map_or(f64::INFINITY, |lu| lu.condition_estimate_transpose())
        })
    }

    /// `A x` or `A^T x`.
    fn apply(&self, x: &[f64], transpose: bool) -> Vec<f64> {
        let n = x.len();
        let mut out = vec![0.0; n];
        for c in 0..n {
            let col = self.matrix.col(c);
            if transpose {
                out[c] = (0..n).map(|r| col[r] * x[r]).sum();
            } else {
                let xc = x[c];
                for (r, v) in out.iter_mut().enumerate() {
                    *v += col[r] * xc;
                }
            }
        }
        out
    }

    fn solve_system(&self, rhs: &[f64], transpose: bool) -> Result<Vec<f64>> {
        let solve = |lu: &DenseLu, b: &[f64]| {
            if transpose {
                lu.solve_transpose(b)
            } else {
                lu.solve(b)
            }
        };
        if self.exact {
            return Ok(solve(&self.lu, rhs));
        }
        let norm = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let mut x = solve(&self.lu, rhs);
        let mut last = f64::INFINITY;
        for _ in 0..MAX_REFINEMENT_SWEEPS {
            let ax = self.apply(&x, transpose);
            let r: Vec<f64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
            let dx = solve(&self.lu, &r);
            let (step, size) = (norm(&dx), norm(&x));
            for (xi, d) in x.iter_mut().zip(&dx) {
                *xi += d;
            }
            if step <= 4.0 * f64::EPSILON * size {
                return Ok(x);
            }
            if step > 0.5 * last {
                // stalled: accept only at rounding level
                if step <= 1e-13 * size {
                    return Ok(x);
                }
                break;
            }
            last = step;
        }
        Ok(solve(&*self.own_lu()?, rhs))
    }

    /// Solves with the transposed collocation matrix, whose rows pair each
    /// surface node with every basis function.
    pub fn solve_transpose(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        self.solve_system(rhs, true)
    }

    /// Fits the potential whose surface trace equals `dirichlet`.
    pub fn fit(&self, dirichlet: &SurfaceField) -> Result<ModalPotential> {
        let d = dirichlet.as_slice();
        let coeffs = self.solve_system(d, false)?;
        let acc = self.apply(&coeffs, false);
        let worst = acc
            .iter()
            .zip(d)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let dmax = dirichlet.max_abs();
        Ok(ModalPotential {
            coeffs,
            zref: self.zref,
            condition: self.condition.get().copied().unwrap_or(f64::NAN),
            residual: if dmax > 0.0 { worst / dmax } else { worst },
        })
    }
}

/// Basis, profiles and collocation matrix of the surface `eta`.
fn assemble(
    grid: &PeriodicGrid,
    eta: &SurfaceField,
) -> Result<(ModalBasis, ProfileTable, Mat<f64>, f64)> {
    eta.check_grid(grid)?;
    let basis = ModalBasis::new(grid);
    let zref = eta.max();
    check_exponent(grid, &basis, zref)?;
    let n = basis.len();
    let prof = basis.profiles(eta.as_slice(), grid.depth(), zref);
    let mut a = Mat::<f64>::zeros(n, n);
    for w in &basis.waves {
        let ch = prof.cosh(w);
        for j in 0..grid.nx() {
            for l in 0..grid.ny() {
                let row = grid.index(j, l);
                let (c, s) = basis.trig(w, j, l);
                a[(row, w.col_cos)] = c * ch[row];
                if let Some(cs) = w.col_sin {
                    a[(row, cs)] = s * ch[row];
                }
            }
        }
    }
    Ok((basis, prof, a, zref))
}

/// Fits the harmonic extension of `dirichlet` given on the surface `eta`.
pub fn fit_modal_potential(
    grid: &PeriodicGrid,
    eta: &SurfaceField,
    dirichlet: &SurfaceField,
) -> Result<ModalPotential> {
    dirichlet.check_grid(grid)?;
    let fit = CollocationFit::new(grid, eta)?;
    fit.condition();
    fit.fit(dirichlet)
}

/// Potential and its first derivatives at a set of nodal heights.
#[derive(Debug, Clone)]
pub struct PotentialSample {
    pub phi: SurfaceField,
    pub phi_x: SurfaceField,
    pub phi_y: SurfaceField,
    pub phi_z: SurfaceField,
}

/// Evaluates the potential at height `z(j, l)` above each node.
pub fn sample_potential(
    grid: &PeriodicGrid,
    pot: &ModalPotential,
    z: &SurfaceField,
) -> Result<PotentialSample> {
    z.check_grid(grid)?;
    let basis = ModalBasis::new(grid);
    if pot.coeffs.len() != basis.len() {
        return Err(Error::ShapeMismatch {
            expected: grid.shape(),
            got: (pot.coeffs.len(), 1),
        });
    }
    let h = grid.depth();
    let n = grid.len();
    let zs = z.as_slice();
    let flat = zs.iter().all(|&v| v == zs[0]);
    let prof = basis.profiles(if flat { &zs[..1] } else { zs }, h, pot.zref);
    let (mut p, mut px, mut py, mut pz) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for w in &basis.waves {
        let a = pot.coeffs[w.col_cos];
        let b = w.col_sin.map_or(0.0, |c| pot.coeffs[c]);
        let (chs, shs) = (prof.cosh(w), prof.sinh(w));
        for j in 0..grid.nx() {
            for l in 0..grid.ny() {
                let idx = grid.index(j, l);
                let (c, s) = basis.trig(w, j, l);
                let m = if flat { 0 } else { idx };
                let (ch, sh) = (chs[m], shs[m]);
                let t = a * c + b * s;
                let dt = b * c - a * s;
                p[idx] += t * ch;
                px[idx] += w.dkx * dt * ch;
                py[idx] += w.dky * dt * ch;
                pz[idx] += w.kabs * t * sh;
            }
        }
    }
    let f = |d| SurfaceField::from_vec(grid, d).expect("grid-sized");
    Ok(PotentialSample {
        phi: f(p),
        phi_x: f(px),
        phi_y: f(py),
        phi_z: f(pz),
    })
}

/// `(phi_x, phi_y, phi_z)` at `z = eta`.
pub fn surface_gradient_of_potential(
    grid: &PeriodicGrid,
    pot: &ModalPotential,
    eta: &SurfaceField,
) -> Result<(SurfaceField, SurfaceField, SurfaceField)> {
    let s = sample_potential(grid, pot, eta)?;
    Ok((s.phi_x, s.phi_y, s.phi_z))
}

/// Potential on the bed `z = -h`.
pub fn bottom_trace(grid: &PeriodicGrid, pot: &ModalPotential) -> Result<SurfaceField> {
    let bed = SurfaceField::constant(grid, -grid.depth());
    Ok(sample_potential(grid, pot, &bed)?.phi)
}

/// Normal-velocity route: `eta_t = phi_z - phi_x eta_x - phi_y eta_y`.
pub fn dno_eta_t(
    grid: &PeriodicGrid,
    eta: &SurfaceField,
    pot: &ModalPotential,
) -> Result<SurfaceField> {
    let (ex, ey) = spectral_gradient(grid, eta);
    let s = sample_potential(grid, pot, eta)?;
    let mut out = s.phi_z;
    for (i, v) in out.as_mut_slice().iter_mut().enumerate() {
        *v -= s.phi_x.as_slice()[i] * ex.as_slice()[i] + s.phi_y.as_slice()[i] * ey.as_slice()[i];
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, GridParams};
    use crate::spectral::{forward, integrate_surface, inverse};
    fn grid(n: usize, depth: f64) -> PeriodicGrid {
        make_grid(GridParams {
            nx: n,
            ny: n,
            depth,
            ..GridParams::default()
        })
        .unwrap()
    }

    /// Flat-surface normal derivative computed mode by mode.
    fn flat_dno(g: &PeriodicGrid, q: &SurfaceField) -> SurfaceField {
        let ny = g.ny();
        let c = forward(g, q)
            .into_iter()
            .enumerate()
            .map(|(idx, v)| {
                let k = g.kx(idx / ny).hypot(g.ky(idx % ny));
                v * k * (k * g.depth()).tanh()
            })
            .collect();
        inverse(g, c)
    }

    #[test]
    fn flat_surface_recovers_the_symbol() {
        let g = grid(16, 1.0);
        let eta = SurfaceField::zeros(&g);
        for (m, n) in [(1.0, 0.0), (2.0, 3.0), (0.0, 5.0), (7.0, -4.0)] {
            let q = SurfaceField::from_fn(&g, |x, y| (m * x + n * y).cos());
            let pot = fit_modal_potential(&g, &eta, &q).unwrap();
            let got = dno_eta_t(&g, &eta, &pot).unwrap();
            let k = f64::hypot(m, n);
            let want = q.scale(k * (k * g.depth()).tanh());
            assert!(got.axpy(-1.0, &want).max_abs() < 1e-10, "mode ({m},{n})");
        }
    }

    #[test]
    fn refinement_matches_a_fresh_factorization() {
        let g = grid(16, 1.0);
        let eta0 = SurfaceField::from_fn(&g, |x, y| 0.02 * (x + 2.0 * y).cos());
        let eta1 = eta0.axpy(
            1.0,
            &SurfaceField::from_fn(&g, |x, y| 1e-4 * (3.0 * x - y).sin()),
        );
        let d = SurfaceField::from_fn(&g, |x, y| (x - y).sin() + 0.3 * (2.0 * x).cos());
        let base = CollocationFit::new(&g, &eta0).unwrap();
        let fresh = CollocationFit::new(&g, &eta1).unwrap();
        let refined = CollocationFit::refined_from(&g, &eta1, &base).unwrap();
        let (a, b) = (fresh.fit(&d).unwrap(), refined.fit(&d).unwrap());
        let scale = a.coeffs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (x, y) in a.coeffs.iter().zip(&b.coeffs) {
            assert!((x - y).abs() < 1e-13 * scale);
        }
        let rhs: Vec<f64> = (0..g.len()).map(|i| (i as f64 * 0.37).sin()).collect();
        let (u, v) = (
            fresh.solve_transpose(&rhs).unwrap(),
            refined.solve_transpose(&rhs).unwrap(),
        );
        let scale = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (x, y) in u.iter().zip(&v) {
            assert!((x - y).abs() < 1e-13 * scale);
        }
        assert!((refined.condition() - fresh.condition()).abs() < 1e-8 * fresh.condition());
    }

    #[test]
    fn exponent_cap_is_enforced() {
        let g = grid(16, 100.0);
        let eta = SurfaceField::zeros(&g);
        let err = CollocationFit::new(&g, &eta).unwrap_err();
        assert!(matches!(err, Error::ExponentOverflow { .. }));
    }

    #[test]
    fn manufactured_potential_is_recovered_inside_the_layer() {
        // phi is exactly representable, so the fit must reproduce it everywhere
        let g = grid(16, 1.0);
        let h = g.depth();
        let exact = |x: f64, y: f64, z: f64| {
            (x).cos() * (z + h).cosh() + 0.3 * (2.0 * x + y).sin() * (5f64.sqrt() * (z + h)).cosh()
                - 0.05 * (3.0 * y).cos() * (3.0 * (z + h)).cosh()
        };
        let eta = SurfaceField::from_fn(&g, |x, y| 0.08 * (x).cos() + 0.03 * (x + 2.0 * y).sin());
        let trace = SurfaceField::from_index_fn(&g, |j, l| exact(g.x(j), g.y(l), eta.get(j, l)));
        let pot = fit_modal_potential(&g, &eta, &trace).unwrap();
        assert!(pot.residual < 1e-10);
        for depth_frac in [0.0, 0.4, 0.9] {
            let z = SurfaceField::constant(&g, -depth_frac * h);
            let s = sample_potential(&g, &pot, &z).unwrap();
            let want = SurfaceField::from_fn(&g, |x, y| exact(x, y, -depth_frac * h));
            assert!(s.phi.axpy(-1.0, &want).max_abs() < 1e-9);
        }
    }

    #[test]
    fn flat_dno_is_self_adjoint_and_nonnegative() {
        let g = grid(16, 0.7);
        let eta = SurfaceField::zeros(&g);
        let u = SurfaceField::from_fn(&g, |x, y| (x + y).sin() + 0.2 * (3.0 * x).cos());
        let v = SurfaceField::from_fn(&g, |x, y| {
            (2.0 * y).cos() - 0.4 * (x + y).cos() + 0.1 * (x - 4.0 * y).sin()
        });
        let gu = dno_eta_t(&g, &eta, &fit_modal_potential(&g, &eta, &u).unwrap()).unwrap();
        let gv = dno_eta_t(&g, &eta, &fit_modal_potential(&g, &eta, &v).unwrap()).unwrap();
        let uv = integrate_surface(&g, &u.zip_map(&gv, |a, b| a * b));
        let vu = integrate_surface(&g, &v.zip_map(&gu, |a, b| a * b));
        assert!((uv - vu).abs() < 1e-10 * uv.abs().max(1.0));
        assert!(integrate_surface(&g, &u.zip_map(&gu, |a, b| a * b)) >= 0.0);
        assert!(gu.axpy(-1.0, &flat_dno(&g, &u)).max_abs() < 1e-10);
    }

    #[test]
    fn bottom_trace_of_flat_mode_is_sech_scaled() {
        let g = grid(8, 1.3);
        let eta = SurfaceField::zeros(&g);
        let q = SurfaceField::from_fn(&g, |x, _| (2.0 * x).cos());
        let pot = fit_modal_potential(&g, &eta, &q).unwrap();
        let b = bottom_trace(&g, &pot).unwrap();
        let want = q.scale(1.0 / (2.0 * 1.3f64).cosh());
        assert!(b.axpy(-1.0, &want).max_abs() < 1e-13);
        assert!(pot.condition.is_finite() && pot.condition < 1e3);
    }
}
