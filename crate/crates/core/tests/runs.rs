use std::path::{Path, PathBuf};

use wavecheck::dynamics::{kinematic_rate, KinematicSolver};
use wavecheck::io::load_trajectory;
use wavecheck::run::run;
use wavecheck::scenarios::{
    CheckConfig, OutputConfig, RunConfig, Scenario, SolverConfig, TimeConfig, WavePhase,
};
use wavecheck::spectral::l2_norm;
use wavecheck::{make_grid, GridParams, SurfaceField, SurfaceState};

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("wavecheck-runs-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn small_grid(n: usize) -> GridParams {
    GridParams {
        nx: n,
        ny: n,
        ..GridParams::default()
    }
}

fn wave_config(steps: usize, dt: f64) -> RunConfig {
    RunConfig {
        grid: small_grid(12),
        scenario: Scenario::LinearWave {
            amplitude: 1e-3,
            mode: [1, 1],
            phase: WavePhase::Traveling,
        },
        time: TimeConfig {
            dt,
            t_end: steps as f64 * dt,
            audit_cadence: 1,
        },
        solver: SolverConfig::default(),
        output: OutputConfig::default(),
        checks: CheckConfig::default(),
    }
}

fn bytes(p: &Path) -> Vec<u8> {
    std::fs::read(p).unwrap()
}

#[test]
fn rest_run_reports_zero_drift() {
    let mut cfg = wave_config(6, 0.01);
    cfg.scenario = Scenario::Rest;
    let out = run(&cfg).unwrap();
    let report = out.report.unwrap();
    for m in &report.drift_metrics {
        assert_eq!(m.density_drift, 0.0);
        assert_eq!(m.max_residual_deviation, 0.0);
    }
    for series in &report.density_integrals {
        assert!(series.iter().all(|v| *v == 0.0));
    }
}

#[test]
fn identical_configs_write_identical_files() {
    let mut paths = Vec::new();
    for tag in ["a", "b"] {
        let mut cfg = wave_config(6, 0.02);
        let traj = scratch(&format!("det-{tag}.traj"));
        let report = scratch(&format!("det-{tag}.csv"));
        cfg.output.trajectory = Some(traj.clone());
        cfg.output.report = Some(report.clone());
        run(&cfg).unwrap();
        paths.push((traj, report));
    }
    assert_eq!(bytes(&paths[0].0), bytes(&paths[1].0));
    assert_eq!(bytes(&paths[0].1), bytes(&paths[1].1));
}

#[test]
fn split_run_matches_unsplit_run() {
    let dt = 0.02;
    let mut whole = wave_config(12, dt);
    whole.output.trajectory = Some(scratch("whole.traj"));
    let whole_out = run(&whole).unwrap();

    let mid = scratch("mid.snap");
    let mut first = wave_config(6, dt);
    first.output.snapshot = Some(mid.clone());
    first.output.trajectory = Some(scratch("first.traj"));
    let first_out = run(&first).unwrap();
    let mut second = wave_config(12, dt);
    second.output.initial_snapshot = Some(mid);
    second.output.trajectory = Some(scratch("second.traj"));
    let second_out = run(&second).unwrap();

    let split: Vec<_> = first_out
        .records
        .iter()
        .chain(second_out.records.iter().skip(1))
        .collect();
    assert_eq!(split.len(), whole_out.records.len());
    for (a, b) in split.iter().zip(&whole_out.records) {
        assert!((a.t - b.t).abs() < 1e-12);
        for law in 0..a.integrals.len() {
            let (x, y) = (a.integrals[law], b.integrals[law]);
            assert!(
                (x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(1e-300),
                "law {} at t = {}: {x} vs {y}",
                law + 1,
                a.t
            );
        }
    }
    let (_, states) = load_trajectory(&scratch("whole.traj")).unwrap();
    assert_eq!(states.len(), 13);
}

#[test]
fn solver_gap_shrinks_with_resolution() {
    let gap = |n: usize| {
        let grid = make_grid(small_grid(n)).unwrap();
        let eta = SurfaceField::from_fn(&grid, |x, y| 0.02 * (x.cos() + (x + y).sin()));
        let q = SurfaceField::from_fn(&grid, |x, y| 0.01 * (y.cos() - (x - y).cos()));
        let s = SurfaceState::new(eta, q, 0.0);
        let a = kinematic_rate(&grid, &s, KinematicSolver::Nonlocal).unwrap();
        let b = kinematic_rate(&grid, &s, KinematicSolver::Dno).unwrap();
        let d = a.eta_t.zip_map(&b.eta_t, |u, v| u - v);
        l2_norm(&grid, &d) / l2_norm(&grid, &b.eta_t)
    };
    let (g12, g24) = (gap(12), gap(24));
    assert!(
        g24 < 0.1 * g12,
        "gap {g12:.3e} at N = 12, {g24:.3e} at N = 24"
    );
}
