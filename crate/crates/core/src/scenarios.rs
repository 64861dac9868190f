//! Initial conditions and run configuration.

use std::f64::consts::PI;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::dynamics::{check_guards, linear_frequency, KinematicSolver};
use crate::error::{Error, Result};
use crate::field::{SurfaceField, SurfaceState};
use crate::grid::{make_grid, GridParams, PeriodicGrid};

/// Minimum box length in packet widths.
pub const PACKET_BOX_WIDTHS: f64 = 16.0;

pub fn scenario_rest(grid: &PeriodicGrid) -> SurfaceState {
    SurfaceState::new(SurfaceField::zeros(grid), SurfaceField::zeros(grid), 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WavePhase {
    #[default]
    Standing,
    Traveling,
}

/// Wavevector of lattice mode `(m, n)`, rejecting modes off the lattice.
pub fn mode_wavevector(grid: &PeriodicGrid, m: i64, n: i64) -> Result<(f64, f64)> {
    let (hx, hy) = ((grid.nx() / 2) as i64, (grid.ny() / 2) as i64);
    if !(-hx..hx).contains(&m) || !(-hy..hy).contains(&n) {
        return Err(Error::InvalidScenario(format!(
            "mode ({m}, {n}) is off the {}x{} lattice",
            grid.nx(),
            grid.ny()
        )));
    }
    Ok((
        2.0 * PI * m as f64 / grid.lx(),
        2.0 * PI * n as f64 / grid.ly(),
    ))
}

/// Linear standing or traveling wave of amplitude `eps` in mode `(m, n)`.
pub fn scenario_linear_wave(
    grid: &PeriodicGrid,
    eps: f64,
    m: i64,
    n: i64,
    phase: WavePhase,
) -> Result<SurfaceState> {
    let (kx, ky) = mode_wavevector(grid, m, n)?;
    let k = kx.hypot(ky);
    if eps == 0.0 {
        return Ok(scenario_rest(grid));
    }
    if k == 0.0 {
        return Err(Error::InvalidScenario("mode (0, 0) carries no wave".into()));
    }
    let eta = SurfaceField::from_fn(grid, |x, y| eps * (kx * x + ky * y).cos());
    let q = match phase {
        WavePhase::Standing => SurfaceField::zeros(grid),
        WavePhase::Traveling => {
            let amp = eps * linear_frequency(grid, k) / (k * (k * grid.depth()).tanh());
            SurfaceField::from_fn(grid, |x, y| amp * (kx * x + ky * y).sin())
        }
    };
    let s = SurfaceState::new(eta, q, 0.0);
    check_guards(grid, &s).map_err(|e| Error::InvalidScenario(e.to_string()))?;
    Ok(s)
}

/// Gaussian hump `A exp(-r^2 / 2 s^2)` at rest, with its mean removed.
///
/// Distances are taken to the nearest periodic image of `center`.
pub fn scenario_gaussian_packet(
    grid: &PeriodicGrid,
    amplitude: f64,
    width: f64,
    center: (f64, f64),
) -> Result<SurfaceState> {
    if !(width > 0.0) {
        return Err(Error::InvalidScenario(format!(
            "packet width must be positive, got {width}"
        )));
    }
    let min_box = PACKET_BOX_WIDTHS * width;
    if grid.lx() < min_box * (1.0 - 1e-12) || grid.ly() < min_box * (1.0 - 1e-12) {
        return Err(Error::InvalidScenario(format!(
            "packet too wide: box ({}, {}) is smaller than {PACKET_BOX_WIDTHS} widths ({min_box})",
            grid.lx(),
            grid.ly()
        )));
    }
    let wrap = |d: f64, len: f64| d - len * (d / len).round();
    let hump = SurfaceField::from_fn(grid, |x, y| {
        let dx = wrap(x - center.0, grid.lx());
        let dy = wrap(y - center.1, grid.ly());
        amplitude * (-(dx * dx + dy * dy) / (2.0 * width * width)).exp()
    });
    let mean = hump.mean();
    let s = SurfaceState::new(hump.map(|v| v - mean), SurfaceField::zeros(grid), 0.0);
    check_guards(grid, &s).map_err(|e| Error::InvalidScenario(e.to_string()))?;
    Ok(s)
}

/// Initial condition selector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Scenario {
    Rest,
    LinearWave {
        amplitude: f64,
        mode: [i64; 2],
        #[serde(default)]
        phase: WavePhase,
    },
    GaussianPacket {
        amplitude: f64,
        width: f64,
        /// Defaults to the box centre.
        center: Option<[f64; 2]>,
    },
}

impl Scenario {
    pub fn build(&self, grid: &PeriodicGrid) -> Result<SurfaceState> {
        match *self {
            Scenario::Rest => Ok(scenario_rest(grid)),
            Scenario::LinearWave {
                amplitude,
                mode,
                phase,
            } => scenario_linear_wave(grid, amplitude, mode[0], mode[1], phase),
            Scenario::GaussianPacket {
                amplitude,
                width,
                center,
            } => {
                let c = center.map_or((0.5 * grid.lx(), 0.5 * grid.ly()), |c| (c[0], c[1]));
                scenario_gaussian_packet(grid, amplitude, width, c)
            }
        }
    }

    /// Amplitude `eps` that sets the scale floor of the audit.
    pub fn amplitude(&self) -> f64 {
        match *self {
            Scenario::Rest => 0.0,
            Scenario::LinearWave { amplitude, .. } | Scenario::GaussianPacket { amplitude, .. } => {
                amplitude.abs()
            }
        }
    }

    /// Reference period: the linear mode for waves, `|k| = 1/width` for packets.
    pub fn reference_period(&self, grid: &PeriodicGrid) -> Option<f64> {
        let k = match *self {
            Scenario::Rest => return None,
            Scenario::LinearWave { mode, .. } => {
                let (kx, ky) = mode_wavevector(grid, mode[0], mode[1]).ok()?;
                kx.hypot(ky)
            }
            Scenario::GaussianPacket { width, .. } => 1.0 / width,
        };
        (k > 0.0).then(|| 2.0 * PI / linear_frequency(grid, k))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "one")]
    pub audit_cadence: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default)]
    pub kinematic: KinematicSolver,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub trajectory: Option<PathBuf>,
    pub report: Option<PathBuf>,
    /// Final state, for restarting.
    pub snapshot: Option<PathBuf>,
    /// Start from this snapshot instead of the scenario.
    pub initial_snapshot: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckConfig {
    #[serde(default = "yes")]
    pub strict: bool,
    #[serde(default = "yes")]
    pub identity: bool,
    #[serde(default)]
    pub probes: bool,
}

fn yes() -> bool {
    true
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            strict: true,
            identity: true,
            probes: false,
        }
    }
}

/// Complete description of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridParams,
    pub scenario: Scenario,
    pub time: TimeConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub checks: CheckConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    /// Checks every invariant that does not need a time step.
    pub fn validate(&self) -> Result<PeriodicGrid> {
        let t = &self.time;
        if !(t.dt.is_finite() && t.dt > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "dt must be positive, got {}",
                t.dt
            )));
        }
        if !(t.t_end.is_finite() && t.t_end >= t.dt) {
            return Err(Error::InvalidConfig(format!(
                "t_end ({}) must be at least dt ({})",
                t.t_end, t.dt
            )));
        }
        if t.audit_cadence < 1 {
            return Err(Error::InvalidConfig(
                "audit_cadence must be at least 1".into(),
            ));
        }
        let grid = make_grid(self.grid)?;
        if self.output.initial_snapshot.is_none() {
            self.scenario.build(&grid)?;
        }
        Ok(grid)
    }

    /// Standing wave `(1, 0)` over one period on a 32 x 32 grid.
    pub fn template() -> Self {
        let grid = GridParams::default();
        let scenario = Scenario::LinearWave {
            amplitude: 1e-3,
            mode: [1, 0],
            phase: WavePhase::Standing,
        };
        let period = 2.0 * PI / (grid.gravity * 1f64.tanh()).sqrt();
        Self {
            grid,
            scenario,
            time: TimeConfig {
                dt: period / 200.0,
                t_end: period,
                audit_cadence: 1,
            },
            solver: SolverConfig::default(),
            output: OutputConfig {
                trajectory: Some("run.traj".into()),
                report: Some("run.csv".into()),
                snapshot: None,
                initial_snapshot: None,
            },
            checks: CheckConfig::default(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::integrate_surface;

    fn grid(n: usize, l: f64) -> PeriodicGrid {
        make_grid(GridParams {
            nx: n,
            ny: n,
            lx: l,
            ly: l,
            ..GridParams::default()
        })
        .unwrap()
    }

    #[test]
    fn standing_wave_construction() {
        let g = grid(32, 2.0 * PI);
        let s = scenario_linear_wave(&g, 1e-3, 1, 0, WavePhase::Standing).unwrap();
        assert!((s.eta.max_abs() - 1e-3).abs() < 1e-15);
        assert_eq!(s.q.max_abs(), 0.0);
        let rest = scenario_linear_wave(&g, 0.0, 1, 0, WavePhase::Traveling).unwrap();
        assert_eq!(rest, scenario_rest(&g));
        assert!(scenario_linear_wave(&g, 1e-3, 16, 0, WavePhase::Standing).is_err());
        assert!(scenario_linear_wave(&g, 1e-3, -16, 0, WavePhase::Standing).is_ok());
    }

    #[test]
    fn packet_is_zero_mean_and_small_at_the_edge() {
        let l = 2.0 * PI;
        let g = grid(32, l);
        let (a, s) = (1e-3, l / 16.0);
        let st = scenario_gaussian_packet(&g, a, s, (l / 2.0, l / 2.0)).unwrap();
        assert!(integrate_surface(&g, &st.eta).abs() < 1e-15 * a * l * l);
        let peak = a * (1.0 - 2.0 * PI * s * s / (l * l));
        assert!((st.eta.max() - peak).abs() < 1e-6 * a);
        let offset = st.eta.get(0, 0) - st.eta.min();
        assert!(offset.abs() < 1e-14 * a);
        assert!(scenario_gaussian_packet(&g, a, l / 15.0, (0.0, 0.0)).is_err());
    }

    #[test]
    fn config_rejects_bad_time_step() {
        let mut c = RunConfig::template();
        c.time.dt = 0.0;
        assert!(c.validate().is_err());
        c.time.dt = -1.0;
        assert!(RunConfig::from_toml(&c.to_toml()).is_err());
    }

    #[test]
    fn template_round_trips() {
        let c = RunConfig::template();
        assert_eq!(RunConfig::from_toml(&c.to_toml()).unwrap(), c);
    }
}
