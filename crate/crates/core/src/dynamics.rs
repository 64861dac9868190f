//! Surface evolution: kinematic condition, Bernoulli condition and RK4.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{SurfaceField, SurfaceState};
use crate::grid::PeriodicGrid;
use crate::harmonic::{dno_eta_t, CollocationFit};
use crate::spectral::{dealiased_map, spectral_divergence, spectral_gradient, spectral_laplacian};

/// Largest admissible surface slope.
pub const MAX_SLOPE: f64 = 0.5;
/// Troughs may not reach below this fraction of the depth.
pub const MAX_TROUGH_FRACTION: f64 = 0.9;

/// How `eta_t` is obtained from `(eta, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KinematicSolver {
    /// Weak-form constraint integrals, one per lattice wave.
    #[default]
    Nonlocal,
    /// Collocated potential, then the normal velocity at the surface.
    Dno,
}

impl std::str::FromStr for KinematicSolver {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nonlocal" => Ok(Self::Nonlocal),
            "dno" => Ok(Self::Dno),
            other => Err(Error::InvalidConfig(format!(
                "unknown kinematic solver `{other}` (expected nonlocal or dno)"
            ))),
        }
    }
}

/// `eta_t` and the factored surface system that produced it.
#[derive(Debug, Clone)]
pub struct KinematicSolution {
    pub eta_t: SurfaceField,
    pub fit: Arc<CollocationFit>,
    pub solver: KinematicSolver,
}

impl KinematicSolution {
    /// Condition estimate of the system solved for `eta_t`.
    pub fn condition(&self) -> f64 {
        match self.solver {
            KinematicSolver::Nonlocal => self.fit.transpose_condition(),
            KinematicSolver::Dno => self.fit.condition(),
        }
    }
}

/// Solves the weak-form kinematic constraints for `eta_t`.
///
/// Row `k = 0` imposes `sum eta_t = 0`. Every other wave contributes the real
/// and imaginary parts of
/// `sum e^{ik.x} [i eta_t cosh(|k|(eta+h)) + (k.grad q)/|k| sinh(|k|(eta+h))] = 0`.
/// The constraint matrix is the transpose of the surface collocation matrix.
pub fn solve_kinematic_nonlocal(
    grid: &PeriodicGrid,
    state: &SurfaceState,
) -> Result<KinematicSolution> {
    kinematic_rate(grid, state, KinematicSolver::Nonlocal)
}

fn nonlocal_eta_t(
    grid: &PeriodicGrid,
    state: &SurfaceState,
    fit: &CollocationFit,
) -> Result<SurfaceField> {
    let basis = fit.basis();
    let prof = fit.profiles();
    let (qx, qy) = spectral_gradient(grid, &state.q);
    let (qx, qy) = (qx.as_slice(), qy.as_slice());
    let mut rhs = vec![0.0; grid.len()];
    for w in &basis.waves {
        if w.kabs == 0.0 {
            continue;
        }
        let shs = prof.sinh(w);
        let (mut re, mut im) = (0.0, 0.0);
        for j in 0..grid.nx() {
            for l in 0..grid.ny() {
                let idx = grid.index(j, l);
                let (c, s) = basis.trig(w, j, l);
                let b = (w.kx * qx[idx] + w.ky * qy[idx]) / w.kabs * shs[idx];
                im -= s * b;
                re += c * b;
            }
        }
        rhs[w.col_cos] = im;
        if let Some(r) = w.col_sin {
            rhs[r] = re;
        }
    }
    SurfaceField::from_vec(grid, fit.solve_transpose(&rhs)?)
}

/// `eta_t` by the selected route.
pub fn kinematic_rate(
    grid: &PeriodicGrid,
    state: &SurfaceState,
    solver: KinematicSolver,
) -> Result<KinematicSolution> {
    state.check_grid(grid)?;
    let fit = Arc::new(CollocationFit::new(grid, &state.eta)?);
    kinematic_with_fit(grid, state, solver, fit)
}

fn kinematic_with_fit(
    grid: &PeriodicGrid,
    state: &SurfaceState,
    solver: KinematicSolver,
    fit: Arc<CollocationFit>,
) -> Result<KinematicSolution> {
    let eta_t = match solver {
        KinematicSolver::Nonlocal => nonlocal_eta_t(grid, state, &fit)?,
        KinematicSolver::Dno => dno_eta_t(grid, &state.eta, &fit.fit(&state.q)?)?,
    };
    Ok(KinematicSolution { eta_t, fit, solver })
}

/// Dynamic condition for the surface potential:
/// `q_t = -|grad q|^2/2 - g eta + (eta_t + grad q.grad eta)^2 / (2 (1 + |grad eta|^2))
///        + (sigma/rho) div(grad eta / sqrt(1 + |grad eta|^2))`.
///
/// Nonlinear terms are dealiased; the linear terms are applied exactly.
pub fn bernoulli_q_t(
    grid: &PeriodicGrid,
    state: &SurfaceState,
    eta_t: &SurfaceField,
) -> Result<SurfaceField> {
    state.check_grid(grid)?;
    eta_t.check_grid(grid)?;
    let (qx, qy) = spectral_gradient(grid, &state.q);
    let (ex, ey) = spectral_gradient(grid, &state.eta);
    let nonlinear = dealiased_map(grid, &[&qx, &qy, &ex, &ey, eta_t], |v| {
        let (qx, qy, ex, ey, et) = (v[0], v[1], v[2], v[3], v[4]);
        let w = et + qx * ex + qy * ey;
        -0.5 * (qx * qx + qy * qy) + 0.5 * w * w / (1.0 + ex * ex + ey * ey)
    });
    let g = grid.gravity();
    let mut out = nonlinear.axpy(-g, &state.eta);
    let cap = grid.capillarity();
    if cap > 0.0 {
        out = out.axpy(cap, &curvature(grid, &state.eta));
    }
    Ok(out)
}

/// `div(grad eta / sqrt(1 + |grad eta|^2))` with the linear part exact.
pub fn curvature(grid: &PeriodicGrid, eta: &SurfaceField) -> SurfaceField {
    let (ex, ey) = spectral_gradient(grid, eta);
    let excess = |v: &[f64]| 1.0 / (1.0 + v[0] * v[0] + v[1] * v[1]).sqrt() - 1.0;
    let nx = dealiased_map(grid, &[&ex, &ey], |v| v[0] * excess(v));
    let ny = dealiased_map(grid, &[&ex, &ey], |v| v[1] * excess(v));
    spectral_laplacian(grid, eta).axpy(1.0, &spectral_divergence(grid, &nx, &ny))
}

/// Time derivatives of the prognostic fields.
#[derive(Debug, Clone)]
pub struct Rates {
    pub eta_t: SurfaceField,
    pub q_t: SurfaceField,
    pub kinematic: KinematicSolution,
}

/// Checks the slope and trough guards.
pub fn check_guards(grid: &PeriodicGrid, state: &SurfaceState) -> Result<()> {
    let (ex, ey) = spectral_gradient(grid, &state.eta);
    let max_slope = ex.zip_map(&ey, f64::hypot).max_abs();
    if !(max_slope <= MAX_SLOPE) {
        return Err(Error::SteepnessExceeded {
            t: state.t,
            max_slope,
        });
    }
    let min_eta = state.eta.min();
    if !(min_eta > -MAX_TROUGH_FRACTION * grid.depth()) {
        return Err(Error::DepthExceeded {
            t: state.t,
            min_eta,
            depth: grid.depth(),
        });
    }
    Ok(())
}

/// `(eta_t, q_t)` at `state`, after the guards pass.
pub fn rates(grid: &PeriodicGrid, state: &SurfaceState, solver: KinematicSolver) -> Result<Rates> {
    rates_near(grid, state, solver, None)
}

/// As [`rates`]; with `near`, the surface system is solved by refinement
/// against the factorization of a nearby surface.
fn rates_near(
    grid: &PeriodicGrid,
    state: &SurfaceState,
    solver: KinematicSolver,
    near: Option<&CollocationFit>,
) -> Result<Rates> {
    check_guards(grid, state)?;
    let fit = match near {
        Some(n) => CollocationFit::refined_from(grid, &state.eta, n)?,
        None => CollocationFit::new(grid, &state.eta)?,
    };
    let kinematic = kinematic_with_fit(grid, state, solver, Arc::new(fit))?;
    let q_t = bernoulli_q_t(grid, state, &kinematic.eta_t)?;
    Ok(Rates {
        eta_t: kinematic.eta_t.clone(),
        q_t,
        kinematic,
    })
}

fn advance(state: &SurfaceState, r: &Rates, dt: f64) -> SurfaceState {
    SurfaceState {
        eta: state.eta.axpy(dt, &r.eta_t),
        q: state.q.axpy(dt, &r.q_t),
        t: state.t + dt,
    }
}

/// One classical fourth-order Runge-Kutta step, returning the rates at the start.
pub fn step_rk4_with_rates(
    grid: &PeriodicGrid,
    state: &SurfaceState,
    dt: f64,
    solver: KinematicSolver,
) -> Result<(SurfaceState, Rates)> {
    let k1 = rates(grid, state, solver)?;
    // later stages reuse the factorization of the first
    let base = Some(&*k1.kinematic.fit);
    let k2 = rates_near(grid, &advance(state, &k1, 0.5 * dt), solver, base)?;
    let k3 = rates_near(grid, &advance(state, &k2, 0.5 * dt), solver, base)?;
    let k4 = rates_near(grid, &advance(state, &k3, dt), solver, base)?;
    let combine = |f: fn(&Rates) -> &SurfaceField| {
        f(&k1).axpy(2.0, f(&k2)).axpy(2.0, f(&k3)).axpy(1.0, f(&k4))
    };
    let deta = combine(|r| &r.eta_t);
    let dq = combine(|r| &r.q_t);
    let next = SurfaceState {
        eta: state.eta.axpy(dt / 6.0, &deta),
        q: state.q.axpy(dt / 6.0, &dq),
        t: state.t + dt,
    };
    Ok((next, k1))
}

/// One classical fourth-order Runge-Kutta step.
pub fn step_rk4(
    grid: &PeriodicGrid,
    state: &SurfaceState,
    dt: f64,
    solver: KinematicSolver,
) -> Result<SurfaceState> {
    step_rk4_with_rates(grid, state, dt, solver).map(|(s, _)| s)
}

/// Linear dispersion relation `omega(k)` including capillarity.
pub fn linear_frequency(grid: &PeriodicGrid, k: f64) -> f64 {
    ((grid.gravity() + grid.capillarity() * k * k) * k * (k * grid.depth()).tanh()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, GridParams};
    use crate::spectral::integrate_surface;

    fn grid(n: usize, sigma: f64) -> PeriodicGrid {
        make_grid(GridParams {
            nx: n,
            ny: n,
            density: 1.0,
            surface_tension: sigma,
            ..GridParams::default()
        })
        .unwrap()
    }

    #[test]
    fn rest_state_has_zero_rates() {
        let g = grid(8, 0.1);
        let s = SurfaceState::new(SurfaceField::zeros(&g), SurfaceField::zeros(&g), 0.0);
        for solver in [KinematicSolver::Nonlocal, KinematicSolver::Dno] {
            let r = rates(&g, &s, solver).unwrap();
            assert_eq!(r.eta_t.max_abs(), 0.0);
            assert_eq!(r.q_t.max_abs(), 0.0);
        }
    }

    #[test]
    fn flat_surface_eta_t_is_tanh_symbol() {
        let g = grid(16, 0.0);
        let q = SurfaceField::from_fn(&g, |x, y| (x).cos() + 0.5 * (2.0 * x - 3.0 * y).sin());
        let s = SurfaceState::new(SurfaceField::zeros(&g), q, 0.0);
        let et = solve_kinematic_nonlocal(&g, &s).unwrap().eta_t;
        let k2 = 13f64.sqrt();
        let want = SurfaceField::from_fn(&g, |x, y| {
            1f64.tanh() * x.cos() + 0.5 * k2 * k2.tanh() * (2.0 * x - 3.0 * y).sin()
        });
        assert!(et.axpy(-1.0, &want).max_abs() < 1e-12);
    }

    #[test]
    fn solvers_agree_on_a_curved_surface() {
        let g = grid(16, 0.0);
        let eta = SurfaceField::from_fn(&g, |x, y| 0.02 * (x).cos() + 0.01 * (x + y).sin());
        let q = SurfaceField::from_fn(&g, |x, y| 0.05 * (x).sin() - 0.02 * (2.0 * y).cos());
        let s = SurfaceState::new(eta, q, 0.0);
        let a = kinematic_rate(&g, &s, KinematicSolver::Nonlocal)
            .unwrap()
            .eta_t;
        let b = kinematic_rate(&g, &s, KinematicSolver::Dno).unwrap().eta_t;
        assert!(a.axpy(-1.0, &b).max_abs() < 1e-8 * b.max_abs());
        assert!(integrate_surface(&g, &a).abs() < 1e-12);
    }

    #[test]
    fn q_t_for_unit_mode_with_flat_surface() {
        let g = grid(8, 0.0);
        let q = SurfaceField::from_fn(&g, |x, _| x.cos());
        let s = SurfaceState::new(SurfaceField::zeros(&g), q, 0.0);
        let et = SurfaceField::zeros(&g);
        let qt = bernoulli_q_t(&g, &s, &et).unwrap();
        let want = SurfaceField::from_fn(&g, |x, _| -0.5 * x.sin().powi(2));
        assert!(qt.axpy(-1.0, &want).max_abs() < 1e-13);
    }

    #[test]
    fn capillary_term_matches_third_order_expansion() {
        let g = grid(32, 0.3);
        let s_cap = g.capillarity();
        for eps in [1e-2, 3e-2] {
            let eta = SurfaceField::from_fn(&g, |x, _| eps * x.cos());
            let s = SurfaceState::new(eta, SurfaceField::zeros(&g), 0.0);
            let qt = bernoulli_q_t(&g, &s, &SurfaceField::zeros(&g)).unwrap();
            let want = SurfaceField::from_fn(&g, |x, _| {
                -g.gravity() * eps * x.cos()
                    + s_cap * (-eps * x.cos() + 1.5 * eps.powi(3) * x.sin().powi(2) * x.cos())
            });
            assert!(qt.axpy(-1.0, &want).max_abs() < 5.0 * s_cap * eps.powi(5));
        }
    }

    #[test]
    fn guards_trip() {
        let g = grid(16, 0.0);
        let steep = SurfaceState::new(
            SurfaceField::from_fn(&g, |x, _| 0.2 * (4.0 * x).sin()),
            SurfaceField::zeros(&g),
            1.5,
        );
        assert!(matches!(
            check_guards(&g, &steep),
            Err(Error::SteepnessExceeded { .. })
        ));
        let deep = SurfaceState::new(
            SurfaceField::from_fn(&g, |x, _| -0.95 + 0.0 * x),
            SurfaceField::zeros(&g),
            0.0,
        );
        assert!(matches!(
            check_guards(&g, &deep),
            Err(Error::DepthExceeded { .. })
        ));
    }
}
