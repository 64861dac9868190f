//! Time integration with periodic auditing, and the dispersion check.

use std::fs::File;
use std::io::{BufWriter, Write};

use crate::audit::{
    prepare_sample, probe_trajectory, report_from_records, sample_record, AuditSample,
    DensityReport, ProbeSeries, SampleRecord,
};
use crate::dynamics::{linear_frequency, step_rk4_with_rates, KinematicSolver};
use crate::error::{Error, Result};
use crate::field::SurfaceState;
use crate::grid::PeriodicGrid;
use crate::io::{load_snapshot, save_report, save_snapshot, write_snapshot};
use crate::scenarios::{mode_wavevector, scenario_linear_wave, RunConfig, WavePhase};
use crate::spectral::integrate_surface;
use crate::testfn::probe_set;

/// Number of steps needed to go from `t0` to `t_end` with step `dt`.
pub fn step_count(t0: f64, t_end: f64, dt: f64) -> usize {
    let n = (t_end - t0) / dt;
    (n - 1e-9).ceil().max(0.0) as usize
}

/// Integrates `steps` RK4 steps, auditing every `cadence`-th state.
///
/// `sink` sees each sample as it is produced. Samples are retained only when
/// `keep` is set.
pub fn simulate(
    grid: &PeriodicGrid,
    initial: SurfaceState,
    dt: f64,
    steps: usize,
    cadence: usize,
    solver: KinematicSolver,
    keep: bool,
    mut sink: impl FnMut(&AuditSample) -> Result<()>,
) -> Result<(Vec<AuditSample>, SurfaceState)> {
    initial.check_grid(grid)?;
    let cadence = cadence.max(1);
    let mut kept = Vec::new();
    let mut state = initial;
    let mut emit = |s: AuditSample| -> Result<()> {
        sink(&s)?;
        if keep {
            kept.push(s);
        }
        Ok(())
    };
    for step in 0..steps {
        let (next, start_rates) = step_rk4_with_rates(grid, &state, dt, solver)?;
        if step % cadence == 0 {
            emit(prepare_sample(grid, &state, solver, Some(start_rates))?)?;
        }
        state = next;
    }
    if steps % cadence == 0 {
        emit(prepare_sample(grid, &state, solver, None)?)?;
    }
    Ok((kept, state))
}

/// Everything a run produced.
#[derive(Debug)]
pub struct RunOutcome {
    pub grid: PeriodicGrid,
    pub final_state: SurfaceState,
    pub records: Vec<SampleRecord>,
    pub report: Option<DensityReport>,
    pub probes: Option<Vec<ProbeSeries>>,
    /// `None` when a suite is disabled or too few samples exist.
    pub strict_pass: Option<bool>,
    pub identity_pass: Option<bool>,
    pub probes_pass: Option<bool>,
}

impl RunOutcome {
    pub fn all_enabled_pass(&self) -> bool {
        [self.strict_pass, self.identity_pass, self.probes_pass]
            .iter()
            .all(|v| v.unwrap_or(true))
    }
}

/// Executes a configured run, writing the configured outputs.
pub fn run(config: &RunConfig) -> Result<RunOutcome> {
    let grid = config.validate()?;
    let initial = match &config.output.initial_snapshot {
        Some(path) => {
            let (g, s) = load_snapshot(path)?;
            if g != grid {
                return Err(Error::InvalidConfig(format!(
                    "snapshot {} was written on a different grid",
                    path.display()
                )));
            }
            s
        }
        None => config.scenario.build(&grid)?,
    };
    let t = &config.time;
    let steps = step_count(initial.t, t.t_end, t.dt);
    let mut traj = match &config.output.trajectory {
        Some(p) => Some(BufWriter::new(File::create(p)?)),
        None => None,
    };
    let mut records = Vec::new();
    let keep = config.checks.probes;
    let (samples, final_state) = simulate(
        &grid,
        initial,
        t.dt,
        steps,
        t.audit_cadence,
        config.solver.kinematic,
        keep,
        |s| {
            if let Some(w) = traj.as_mut() {
                write_snapshot(w, &grid, &s.state)?;
            }
            records.push(sample_record(&grid, s)?);
            Ok(())
        },
    )?;
    if let Some(mut w) = traj {
        w.flush()?;
    }
    if let Some(p) = &config.output.snapshot {
        save_snapshot(p, &grid, &final_state)?;
    }
    let dt_s = t.dt * t.audit_cadence as f64;
    let report = if records.len() >= 5 {
        Some(report_from_records(
            &grid,
            &records,
            dt_s,
            config.scenario.amplitude(),
        )?)
    } else {
        None
    };
    if let (Some(p), Some(r)) = (&config.output.report, &report) {
        save_report(p, r)?;
    }
    let probes = if keep && samples.len() >= 5 {
        Some(probe_trajectory(&grid, &samples, dt_s, &probe_set())?)
    } else {
        None
    };
    let checks = &config.checks;
    let strict_pass = report
        .as_ref()
        .filter(|_| checks.strict)
        .map(|r| r.strict_suite_pass());
    let identity_pass = report
        .as_ref()
        .filter(|_| checks.identity)
        .map(|r| r.identity_suite_pass());
    let probes_pass = probes.as_ref().map(|ps| {
        ps.iter().all(|p| {
            p.residual_1[p.interior.clone()].iter().all(|v| v.passes())
                && p.residual_2.iter().all(|v| v.passes())
        })
    });
    Ok(RunOutcome {
        grid,
        final_state,
        records,
        report,
        probes,
        strict_pass,
        identity_pass,
        probes_pass,
    })
}

/// Measured and predicted period of a linear standing wave.
#[derive(Debug, Clone, Copy)]
pub struct DispersionCheck {
    pub measured: f64,
    pub predicted: f64,
}

impl DispersionCheck {
    pub fn relative_error(&self) -> f64 {
        (self.measured - self.predicted).abs() / self.predicted
    }
}

/// Projection of `eta` on `cos(k.x)`, normalised to the mode amplitude.
fn mode_amplitude(grid: &PeriodicGrid, state: &SurfaceState, kx: f64, ky: f64) -> f64 {
    let w = state.eta.zip_map(
        &crate::field::SurfaceField::from_fn(grid, |x, y| (kx * x + ky * y).cos()),
        |a, b| a * b,
    );
    2.0 * integrate_surface(grid, &w) / grid.area()
}

/// Root of the cubic through four equally spaced samples, between the middle two.
fn cubic_root(t: [f64; 4], f: [f64; 4]) -> f64 {
    let h = t[1] - t[0];
    let p = |s: f64| {
        // Lagrange basis on nodes -1, 0, 1, 2
        let l0 = -s * (s - 1.0) * (s - 2.0) / 6.0;
        let l1 = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0;
        let l2 = -(s + 1.0) * s * (s - 2.0) / 2.0;
        let l3 = (s + 1.0) * s * (s - 1.0) / 6.0;
        f[0] * l0 + f[1] * l1 + f[2] * l2 + f[3] * l3
    };
    let (mut a, mut b) = (0.0, 1.0);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (p(a) > 0.0) == (p(m) > 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    t[1] + 0.5 * (a + b) * h
}

/// Integrates a standing wave of mode `(m, n)` for just over one period and
/// measures the period from the two zero crossings of the mode amplitude.
pub fn dispersion_check(
    grid: &PeriodicGrid,
    eps: f64,
    mode: (i64, i64),
    steps_per_period: usize,
    solver: KinematicSolver,
) -> Result<DispersionCheck> {
    let (kx, ky) = mode_wavevector(grid, mode.0, mode.1)?;
    let predicted = 2.0 * std::f64::consts::PI / linear_frequency(grid, kx.hypot(ky));
    let dt = predicted / steps_per_period as f64;
    let mut state = scenario_linear_wave(grid, eps, mode.0, mode.1, WavePhase::Standing)?;
    let steps = steps_per_period + steps_per_period / 8;
    let mut times = vec![state.t];
    let mut amps = vec![mode_amplitude(grid, &state, kx, ky)];
    for _ in 0..steps {
        state = crate::dynamics::step_rk4(grid, &state, dt, solver)?;
        times.push(state.t);
        amps.push(mode_amplitude(grid, &state, kx, ky));
    }
    let mut crossings = Vec::new();
    for i in 1..amps.len() - 2 {
        if (amps[i] > 0.0) != (amps[i + 1] > 0.0) {
            let t4 = [times[i - 1], times[i], times[i + 1], times[i + 2]];
            let f4 = [amps[i - 1], amps[i], amps[i + 1], amps[i + 2]];
            crossings.push(cubic_root(t4, f4));
        }
    }
    if crossings.len() < 2 {
        return Err(Error::InvalidScenario(
            "standing wave did not complete half an oscillation".into(),
        ));
    }
    Ok(DispersionCheck {
        measured: 2.0 * (crossings[1] - crossings[0]),
        predicted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_count_tolerates_rounding() {
        assert_eq!(step_count(0.0, 1.0, 0.1), 10);
        assert_eq!(step_count(0.5, 1.0, 0.1), 5);
        assert_eq!(step_count(0.0, 1.05, 0.1), 11);
    }

    #[test]
    fn cubic_root_is_exact_for_cubics() {
        let f = |t: f64| (t - 0.37) * (t * t + 1.0);
        let t = [0.0, 0.25, 0.5, 0.75];
        let r = cubic_root(t, t.map(f));
        assert!((r - 0.37).abs() < 1e-14);
    }
}
