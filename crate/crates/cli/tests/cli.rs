use std::path::PathBuf;
use std::process::{Command, Output};

use wavecheck::scenarios::{RunConfig, Scenario};

fn wavecheck(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wavecheck"))
        .args(args)
        .output()
        .unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("wavecheck-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn template() -> RunConfig {
    let out = wavecheck(&["print-config-template"]);
    assert!(out.status.success());
    RunConfig::from_toml(std::str::from_utf8(&out.stdout).unwrap()).unwrap()
}

#[test]
fn template_round_trips() {
    assert_eq!(template(), RunConfig::template());
}

#[test]
fn nonpositive_dt_is_rejected() {
    let mut cfg = template();
    cfg.time.dt = 0.0;
    let path = scratch("bad.toml");
    std::fs::write(&path, cfg.to_toml()).unwrap();
    let out = wavecheck(&["run", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dt must be positive"));
}

#[test]
fn rest_run_passes_and_audits_to_zero() {
    let mut cfg = template();
    cfg.grid.nx = 8;
    cfg.grid.ny = 8;
    cfg.scenario = Scenario::Rest;
    cfg.time.dt = 0.05;
    cfg.time.t_end = 0.3;
    let traj = scratch("rest.traj");
    let report = scratch("rest.csv");
    cfg.output.trajectory = Some(traj.clone());
    cfg.output.report = Some(report.clone());
    let path = scratch("rest.toml");
    std::fs::write(&path, cfg.to_toml()).unwrap();

    let out = wavecheck(&["--solver", "dno", "run", path.to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(&report).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 7);
    for row in rows {
        let cols: Vec<f64> = row.split(',').map(|c| c.trim().parse().unwrap()).collect();
        assert!(cols[1..13].iter().all(|v| *v == 0.0), "{row}");
    }

    let audited = scratch("rest-audit.csv");
    let out = wavecheck(&[
        "audit",
        traj.to_str().unwrap(),
        "--report",
        audited.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stdout).contains("strict suite: PASS"));
}
