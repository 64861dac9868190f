use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use wavecheck::audit::{
    audit_trajectory, prepare_sample, probe_trajectory, DensityReport, ProbeSeries,
};
use wavecheck::io::{load_trajectory, save_report};
use wavecheck::run::{dispersion_check, run};
use wavecheck::scenarios::RunConfig;
use wavecheck::testfn::probe_set;
use wavecheck::{make_grid, Error, GridParams, KinematicSolver};

#[derive(Parser)]
#[command(
    name = "wavecheck",
    version,
    about = "Surface-wave solver and conservation-law auditor"
)]
struct Cli {
    /// Worker threads for dense linear algebra; 1 keeps output byte-reproducible.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Kinematic solver, overriding the config.
    #[arg(long, global = true)]
    solver: Option<KinematicSolver>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate and audit the run described by a config file.
    Run { config: PathBuf },
    /// Audit a saved trajectory.
    Audit {
        trajectory: PathBuf,
        /// Write the per-sample report here.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Also evaluate the nonlocal probes.
        #[arg(long)]
        probes: bool,
        /// Amplitude for the scale floor; defaults to max |eta| of the first sample.
        #[arg(long)]
        amplitude: Option<f64>,
    },
    /// Measure the period of a small standing wave against linear theory.
    DispersionCheck {
        #[arg(long, default_value_t = 32)]
        n: usize,
        #[arg(long, default_value_t = 1e-3)]
        eps: f64,
        #[arg(long, num_args = 2, default_values_t = [1, 0], allow_negative_numbers = true)]
        mode: Vec<i64>,
        #[arg(long, default_value_t = 200)]
        steps_per_period: usize,
        /// Allowed relative period error.
        #[arg(long, default_value_t = 1e-3)]
        tolerance: f64,
    },
    /// Print a template config to stdout.
    PrintConfigTemplate,
}

const EXIT_GUARD: u8 = 1;
const EXIT_SUITE: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    faer::set_global_parallelism(if cli.threads <= 1 {
        faer::Par::Seq
    } else {
        faer::Par::rayon(cli.threads)
    });
    match dispatch(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_SUITE),
        Err(e) => {
            eprintln!("error: {e:#}");
            let guard = e.downcast_ref::<Error>().is_some_and(Error::is_guard_abort);
            ExitCode::from(if guard { EXIT_GUARD } else { EXIT_SUITE })
        }
    }
}

/// `Ok(false)` when an enabled suite failed.
fn dispatch(cli: &Cli) -> anyhow::Result<bool> {
    match &cli.command {
        Command::Run { config } => run_config(config, cli.solver),
        Command::Audit {
            trajectory,
            report,
            probes,
            amplitude,
        } => audit_file(
            trajectory,
            cli.solver.unwrap_or_default(),
            report.as_deref(),
            *probes,
            *amplitude,
        ),
        Command::DispersionCheck {
            n,
            eps,
            mode,
            steps_per_period,
            tolerance,
        } => {
            let grid = make_grid(GridParams {
                nx: *n,
                ny: *n,
                ..GridParams::default()
            })?;
            let c = dispersion_check(
                &grid,
                *eps,
                (mode[0], mode[1]),
                *steps_per_period,
                cli.solver.unwrap_or_default(),
            )?;
            let err = c.relative_error();
            println!(
                "measured period {:.12} s, predicted {:.12} s, relative error {err:.3e}",
                c.measured, c.predicted
            );
            Ok(err <= *tolerance)
        }
        Command::PrintConfigTemplate => {
            print!("{}", RunConfig::template().to_toml());
            Ok(true)
        }
    }
}

fn run_config(path: &Path, solver: Option<KinematicSolver>) -> anyhow::Result<bool> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut config = RunConfig::from_toml(&text)?;
    if let Some(s) = solver {
        config.solver.kinematic = s;
    }
    let out = run(&config)?;
    println!(
        "{} samples, final t = {:.6} s",
        out.records.len(),
        out.final_state.t
    );
    match &out.report {
        Some(r) => print_report(r),
        None => println!("fewer than 5 samples; no report"),
    }
    if let Some(ps) = &out.probes {
        print_probes(ps);
    }
    for (name, v) in [
        ("strict", out.strict_pass),
        ("identity", out.identity_pass),
        ("probes", out.probes_pass),
    ] {
        if let Some(v) = v {
            println!("{name} suite: {}", verdict(v));
        }
    }
    Ok(out.all_enabled_pass())
}

fn audit_file(
    path: &Path,
    solver: KinematicSolver,
    report_path: Option<&Path>,
    probes: bool,
    amplitude: Option<f64>,
) -> anyhow::Result<bool> {
    let (grid, states) = load_trajectory(path)?;
    if states.len() < 5 {
        bail!("trajectory has {} samples; need at least 5", states.len());
    }
    let dt_s = states[1].t - states[0].t;
    let samples = states
        .iter()
        .map(|s| prepare_sample(&grid, s, solver, None))
        .collect::<wavecheck::Result<Vec<_>>>()?;
    let report = audit_trajectory(&grid, &samples, dt_s, amplitude)?;
    if let Some(p) = report_path {
        save_report(p, &report)?;
    }
    print_report(&report);
    let mut pass = report.strict_suite_pass() && report.identity_suite_pass();
    println!(
        "strict suite: {}\nidentity suite: {}",
        verdict(report.strict_suite_pass()),
        verdict(report.identity_suite_pass())
    );
    if probes {
        let ps = probe_trajectory(&grid, &samples, dt_s, &probe_set())?;
        let ok = print_probes(&ps);
        println!("probes suite: {}", verdict(ok));
        pass &= ok;
    }
    Ok(pass)
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn print_report(r: &DensityReport) {
    println!(
        "{:>4} {:>12} {:>12} {:>12} {:>12} {:>7} {:>7}",
        "law", "drift", "scale", "drift/scale", "dev/scale", "strict", "ident"
    );
    for (i, m) in r.drift_metrics.iter().enumerate() {
        println!(
            "{:>4} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e} {:>7} {:>7}",
            i + 1,
            m.density_drift,
            m.scale,
            m.density_drift / m.scale,
            m.max_residual_deviation / m.scale,
            verdict(m.strict_pass()),
            verdict(m.identity_pass()),
        );
    }
}

/// Prints the worst probe ratios; returns whether every probe passed.
fn print_probes(ps: &[ProbeSeries]) -> bool {
    let mut all = true;
    for p in ps {
        let ratio = |v: &wavecheck::audit::ProbeValue| {
            if v.magnitude > 0.0 {
                v.value.abs() / v.magnitude
            } else {
                0.0
            }
        };
        let r1 = &p.residual_1[p.interior.clone()];
        let w1 = r1.iter().map(ratio).fold(0.0, f64::max);
        let w2 = p.residual_2.iter().map(ratio).fold(0.0, f64::max);
        let ok = r1.iter().all(|v| v.passes()) && p.residual_2.iter().all(|v| v.passes());
        all &= ok;
        println!(
            "probe {:?}: residual_1 {w1:.3e}, residual_2 {w2:.3e} {}",
            p.spec,
            verdict(ok)
        );
    }
    all
}
