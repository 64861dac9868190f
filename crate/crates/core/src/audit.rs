//! Conservation-law audit over sampled trajectories.
//!
//! Twelve surface densities are integrated over the box at every sample, their
//! time derivatives are taken by fourth-order finite differences, and the
//! difference from each law's bed-flux right-hand side is reported as a
//! residual. Horizontal weights use box-centred coordinates.

use std::ops::Range;

use num_complex::Complex64;

use crate::dynamics::{rates, KinematicSolver, Rates};
use crate::error::{Error, Result};
use crate::field::{SurfaceField, SurfaceState};
use crate::grid::PeriodicGrid;
use crate::harmonic::{sample_potential, ModalPotential};
use crate::spectral::{integrate_surface, spectral_gradient};
use crate::testfn::TestFunctionSpec;

pub const LAW_COUNT: usize = 12;
/// Laws whose integral is conserved outright.
pub const STRICT_LAWS: [usize; 6] = [1, 2, 3, 4, 6, 7];
/// Laws audited through their bed-flux identity.
pub const IDENTITY_LAWS: [usize; 6] = [5, 8, 9, 10, 11, 12];
/// Drift bound of the strict suite, relative to `scale_i`.
pub const STRICT_TOL: f64 = 1e-6;
/// Bound on residual variation in the identity suite, relative to `scale_i`.
pub const IDENTITY_TOL: f64 = 1e-5;
/// Probe bound relative to the summed term magnitudes.
pub const PROBE_TOL: f64 = 1e-6;

fn centred_field(grid: &PeriodicGrid, along_x: bool) -> SurfaceField {
    SurfaceField::from_index_fn(grid, |j, l| {
        if along_x {
            grid.centred_x(j)
        } else {
            grid.centred_y(l)
        }
    })
}

/// Pointwise surface-energy excess `(sigma/rho)(sqrt(1 + |grad eta|^2) - 1)`.
pub fn capillary_energy_density(grid: &PeriodicGrid, eta: &SurfaceField) -> SurfaceField {
    let s = grid.capillarity();
    let (ex, ey) = spectral_gradient(grid, eta);
    ex.zip_map(&ey, |a, b| {
        let g2 = a * a + b * b;
        // sqrt(1 + g2) - 1 without cancellation
        s * g2 / ((1.0 + g2).sqrt() + 1.0)
    })
}

/// The twelve conserved densities, `T_1` first.
pub fn density_fields(
    grid: &PeriodicGrid,
    state: &SurfaceState,
    eta_t: &SurfaceField,
) -> Result<[SurfaceField; LAW_COUNT]> {
    state.check_grid(grid)?;
    eta_t.check_grid(grid)?;
    let t = state.t;
    let g = grid.gravity();
    let (eta, q) = (&state.eta, &state.q);
    let (ex, ey) = spectral_gradient(grid, eta);
    let xc = centred_field(grid, true);
    let yc = centred_field(grid, false);
    let n = grid.len();
    let (e, qq, et) = (eta.as_slice(), q.as_slice(), eta_t.as_slice());
    let (exs, eys) = (ex.as_slice(), ey.as_slice());
    let (xs, ys) = (xc.as_slice(), yc.as_slice());
    let cap = if grid.capillarity() > 0.0 {
        Some(capillary_energy_density(grid, eta))
    } else {
        None
    };
    let mut out: [Vec<f64>; LAW_COUNT] = Default::default();
    for v in out.iter_mut() {
        v.reserve(n);
    }
    for i in 0..n {
        let (eta, q, eta_t, ex, ey, x, y) = (e[i], qq[i], et[i], exs[i], eys[i], xs[i], ys[i]);
        let t3 =
            0.5 * q * eta_t + 0.5 * g * eta * eta + cap.as_ref().map_or(0.0, |c| c.as_slice()[i]);
        let t4 = eta;
        let t5 = q + g * t * eta;
        let t8 = 0.5 * eta * eta - t * t5 + 0.5 * g * t * t * eta;
        let vals = [
            -q * ex,
            -q * ey,
            t3,
            t4,
            t5,
            x * eta + t * q * ex,
            y * eta + t * q * ey,
            t8,
            (x * ey - y * ex) * q,
            (x + eta * ex) * q + g * t * (x * eta + t * q * ex) - 0.5 * g * t * t * q * ex,
            (y + eta * ey) * q + g * t * (y * eta + t * q * ey) - 0.5 * g * t * t * q * ey,
            (eta - x * ex - y * ey) * q + t * (9.0 * g * t8 - 5.0 * t3) + 4.5 * g * t * t * t5
                - 1.5 * g * g * t * t * t * t4,
        ];
        for (dst, v) in out.iter_mut().zip(vals) {
            dst.push(v);
        }
    }
    Ok(out.map(|v| SurfaceField::from_vec(grid, v).expect("grid-sized")))
}

/// Bed traces of the potential and of its time derivative.
#[derive(Debug, Clone)]
pub struct BedFields {
    pub phi: SurfaceField,
    pub phi_x: SurfaceField,
    pub phi_y: SurfaceField,
    pub phi_t: SurfaceField,
    pub phi_tx: SurfaceField,
    pub phi_ty: SurfaceField,
}

impl BedFields {
    pub fn new(
        grid: &PeriodicGrid,
        pot_phi: &ModalPotential,
        pot_phi_t: &ModalPotential,
    ) -> Result<Self> {
        let bed = SurfaceField::constant(grid, -grid.depth());
        let phi = sample_potential(grid, pot_phi, &bed)?.phi;
        let phi_t = sample_potential(grid, pot_phi_t, &bed)?.phi;
        let (phi_x, phi_y) = spectral_gradient(grid, &phi);
        let (phi_tx, phi_ty) = spectral_gradient(grid, &phi_t);
        Ok(Self {
            phi,
            phi_x,
            phi_y,
            phi_t,
            phi_tx,
            phi_ty,
        })
    }

    /// `|grad_perp phi|^2` on the bed.
    pub fn speed_sq(&self) -> SurfaceField {
        self.phi_x.zip_map(&self.phi_y, |a, b| a * a + b * b)
    }
}

/// Whether law `law` (1-based) needs bed potentials.
pub fn law_needs_potentials(law: usize) -> bool {
    matches!(law, 5 | 8 | 9 | 10 | 11 | 12)
}

/// Bed-flux right-hand side of law `law` (1-based) at time `t`.
///
/// Laws 5 and 12 include the time-dependent bed kinetic terms that close the
/// identities exactly; the constants `-g h A` and `2 g h^2 A` are kept as stated,
/// so residuals of these laws carry a constant offset.
pub fn flux_rhs_with_bed(
    grid: &PeriodicGrid,
    law: usize,
    t: f64,
    bed: Option<&BedFields>,
) -> Result<f64> {
    if !(1..=LAW_COUNT).contains(&law) {
        return Err(Error::InvalidConfig(format!(
            "law index {law} outside 1..=12"
        )));
    }
    if !law_needs_potentials(law) {
        return Ok(0.0);
    }
    let bed =
        bed.ok_or_else(|| Error::InvalidConfig(format!("law {law} needs the bed potentials")))?;
    let g = grid.gravity();
    let h = grid.depth();
    let area = grid.area();
    let int = |f: &SurfaceField| integrate_surface(grid, f);
    let k2 = bed.speed_sq();
    let xc = centred_field(grid, true);
    let yc = centred_field(grid, false);
    let v = match law {
        5 => -g * h * area - 0.5 * int(&k2),
        8 => int(&k2.zip_map(&bed.phi, |k, p| 0.5 * t * k - p)),
        9 => {
            int(&xc.zip_map(&bed.phi_ty, |x, a| x * a))
                - int(&yc.zip_map(&bed.phi_tx, |y, b| y * b))
        }
        10 => -0.5 * int(&k2.zip_map(&xc, |k, x| k * x)),
        11 => -0.5 * int(&k2.zip_map(&yc, |k, y| k * y)),
        12 => {
            let mut acc = 0.0;
            for i in 0..grid.len() {
                let (pt, p, kk) = (
                    bed.phi_t.as_slice()[i],
                    bed.phi.as_slice()[i],
                    k2.as_slice()[i],
                );
                let pressure = -pt - 0.5 * kk + g * h;
                acc += 2.0 * g * h * h - pressure * h - pt * h - 9.0 * g * t * p
                    + 2.25 * g * t * t * kk;
            }
            acc * grid.cell_area()
        }
        _ => unreachable!(),
    };
    Ok(v)
}

/// Bed-flux right-hand side of law `law` (1-based) for `state`.
pub fn flux_rhs(
    grid: &PeriodicGrid,
    law: usize,
    state: &SurfaceState,
    pot_phi: Option<&ModalPotential>,
    pot_phi_t: Option<&ModalPotential>,
) -> Result<f64> {
    let bed = match (pot_phi, pot_phi_t) {
        (Some(p), Some(pt)) => Some(BedFields::new(grid, p, pt)?),
        _ => None,
    };
    flux_rhs_with_bed(grid, law, state.t, bed.as_ref())
}

/// Everything the auditor needs at one sample time.
#[derive(Debug, Clone)]
pub struct AuditSample {
    pub state: SurfaceState,
    pub eta_t: SurfaceField,
    pub q_t: SurfaceField,
    pub pot_phi: ModalPotential,
    pub pot_phi_t: ModalPotential,
    pub phi_z_surface: SurfaceField,
    pub bed: BedFields,
    pub kinematic_condition: f64,
    pub collocation_condition: f64,
}

/// Fits both potentials at `state`; reuses `rates` when the caller has them.
///
/// The time-derivative potential is the harmonic extension of
/// `phi_t = q_t - phi_z eta_t` on the same surface.
pub fn prepare_sample(
    grid: &PeriodicGrid,
    state: &SurfaceState,
    solver: KinematicSolver,
    known: Option<Rates>,
) -> Result<AuditSample> {
    let r = match known {
        Some(r) => r,
        None => rates(grid, state, solver)?,
    };
    let fit = r.kinematic.fit.clone();
    let pot_phi = fit.fit(&state.q)?;
    let phi_z_surface = sample_potential(grid, &pot_phi, &state.eta)?.phi_z;
    let dirichlet_t = r
        .q_t
        .zip_map(&phi_z_surface.zip_map(&r.eta_t, |a, b| a * b), |a, b| a - b);
    let pot_phi_t = fit.fit(&dirichlet_t)?;
    let bed = BedFields::new(grid, &pot_phi, &pot_phi_t)?;
    Ok(AuditSample {
        state: state.clone(),
        eta_t: r.eta_t,
        q_t: r.q_t,
        pot_phi,
        pot_phi_t,
        phi_z_surface,
        bed,
        kinematic_condition: r.kinematic.condition(),
        collocation_condition: fit.condition(),
    })
}

/// Fourth-order derivative of a uniformly sampled series; one-sided at the ends.
pub fn fd_derivative(f: &[f64], dt: f64) -> Result<Vec<f64>> {
    let n = f.len();
    if n < 5 {
        return Err(Error::InvalidTrajectory(format!(
            "need at least 5 samples for the time derivative, got {n}"
        )));
    }
    let c = 1.0 / (12.0 * dt);
    let mut d = vec![0.0; n];
    d[0] = c * (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]);
    d[1] = c * (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]);
    for i in 2..n - 2 {
        d[i] = c * (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]);
    }
    d[n - 1] = -c
        * (-25.0 * f[n - 1] + 48.0 * f[n - 2] - 36.0 * f[n - 3] + 16.0 * f[n - 4] - 3.0 * f[n - 5]);
    d[n - 2] =
        -c * (-3.0 * f[n - 1] - 10.0 * f[n - 2] + 18.0 * f[n - 3] - 6.0 * f[n - 4] + f[n - 5]);
    Ok(d)
}

/// Per-law summary over the interior samples.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LawMetrics {
    pub max_abs_residual: f64,
    pub mean_residual: f64,
    pub max_residual_deviation: f64,
    /// `max_t |int T_i(t) - int T_i(0)|` over all samples.
    pub density_drift: f64,
    /// `max(max_t |int T_i|, g eps^2 Lx Ly)`.
    pub scale: f64,
}

impl LawMetrics {
    pub fn strict_pass(&self) -> bool {
        self.density_drift <= STRICT_TOL * self.scale
    }
    pub fn identity_pass(&self) -> bool {
        self.max_residual_deviation <= IDENTITY_TOL * self.scale
    }
}

/// Time series and metrics of one audited trajectory.
#[derive(Debug, Clone)]
pub struct DensityReport {
    pub times: Vec<f64>,
    /// `[law][sample]`.
    pub density_integrals: Vec<Vec<f64>>,
    pub rhs_values: Vec<Vec<f64>>,
    pub residuals: Vec<Vec<f64>>,
    pub drift_metrics: Vec<LawMetrics>,
    /// `int (sigma/rho)(sqrt(1+|grad eta|^2) - 1)` per sample.
    pub capillary_energy: Vec<f64>,
    pub kinematic_condition: Vec<f64>,
    pub collocation_condition: Vec<f64>,
    /// Samples where the centred stencil fits.
    pub interior: Range<usize>,
    pub amplitude: f64,
}

impl DensityReport {
    pub fn law(&self, law: usize) -> &LawMetrics {
        &self.drift_metrics[law - 1]
    }
    pub fn strict_suite_pass(&self) -> bool {
        STRICT_LAWS.iter().all(|&i| self.law(i).strict_pass())
    }
    pub fn identity_suite_pass(&self) -> bool {
        IDENTITY_LAWS.iter().all(|&i| self.law(i).identity_pass())
    }
}

/// Density integrals and bed fluxes at a single sample.
pub fn sample_integrals(
    grid: &PeriodicGrid,
    s: &AuditSample,
) -> Result<([f64; LAW_COUNT], [f64; LAW_COUNT])> {
    let fields = density_fields(grid, &s.state, &s.eta_t)?;
    let mut ints = [0.0; LAW_COUNT];
    let mut rhs = [0.0; LAW_COUNT];
    for i in 0..LAW_COUNT {
        ints[i] = integrate_surface(grid, &fields[i]);
        rhs[i] = flux_rhs_with_bed(grid, i + 1, s.state.t, Some(&s.bed))?;
    }
    Ok((ints, rhs))
}

/// Per-sample quantities that do not need neighbours.
#[derive(Debug, Clone)]
pub struct SampleRecord {
    pub t: f64,
    pub integrals: [f64; LAW_COUNT],
    pub rhs: [f64; LAW_COUNT],
    pub capillary_energy: f64,
    pub kinematic_condition: f64,
    pub collocation_condition: f64,
}

pub fn sample_record(grid: &PeriodicGrid, s: &AuditSample) -> Result<SampleRecord> {
    let (integrals, rhs) = sample_integrals(grid, s)?;
    Ok(SampleRecord {
        t: s.state.t,
        integrals,
        rhs,
        capillary_energy: integrate_surface(grid, &capillary_energy_density(grid, &s.state.eta)),
        kinematic_condition: s.kinematic_condition,
        collocation_condition: s.collocation_condition,
    })
}

/// Audits a uniformly sampled trajectory.
///
/// `amplitude` sets the floor `g eps^2 Lx Ly` of each law's scale; when absent
/// it is `max |eta|` at the first sample.
pub fn audit_trajectory(
    grid: &PeriodicGrid,
    samples: &[AuditSample],
    dt_s: f64,
    amplitude: Option<f64>,
) -> Result<DensityReport> {
    let recs = samples
        .iter()
        .map(|s| sample_record(grid, s))
        .collect::<Result<Vec<_>>>()?;
    let amp = amplitude.unwrap_or_else(|| samples.first().map_or(0.0, |s| s.state.eta.max_abs()));
    report_from_records(grid, &recs, dt_s, amp)
}

/// Assembles a report from per-sample records.
pub fn report_from_records(
    grid: &PeriodicGrid,
    recs: &[SampleRecord],
    dt_s: f64,
    amplitude: f64,
) -> Result<DensityReport> {
    let n = recs.len();
    if n < 5 {
        return Err(Error::InvalidTrajectory(format!(
            "need at least 5 samples, got {n}"
        )));
    }
    if !(dt_s > 0.0) {
        return Err(Error::InvalidTrajectory(format!(
            "cadence must be positive, got {dt_s}"
        )));
    }
    for w in recs.windows(2) {
        let gap = w[1].t - w[0].t;
        if (gap - dt_s).abs() > 1e-9 * dt_s.max(w[1].t.abs()) {
            return Err(Error::InvalidTrajectory(format!(
                "non-uniform sampling: gap {gap} at t = {} (expected {dt_s})",
                w[0].t
            )));
        }
    }
    let interior = 2..n - 2;
    let floor = grid.gravity() * amplitude * amplitude * grid.area();
    let mut density_integrals = Vec::with_capacity(LAW_COUNT);
    let mut rhs_values = Vec::with_capacity(LAW_COUNT);
    let mut residuals = Vec::with_capacity(LAW_COUNT);
    let mut drift_metrics = Vec::with_capacity(LAW_COUNT);
    for law in 0..LAW_COUNT {
        let ints: Vec<f64> = recs.iter().map(|r| r.integrals[law]).collect();
        let rhs: Vec<f64> = recs.iter().map(|r| r.rhs[law]).collect();
        let d = fd_derivative(&ints, dt_s)?;
        let res: Vec<f64> = d.iter().zip(&rhs).map(|(a, b)| a - b).collect();
        let inner = &res[interior.clone()];
        // Offset from the first value keeps the mean exact for constant series.
        let mean = inner[0] + inner.iter().map(|v| v - inner[0]).sum::<f64>() / inner.len() as f64;
        let scale = ints.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(floor);
        drift_metrics.push(LawMetrics {
            max_abs_residual: inner.iter().fold(0.0, |m, v| m.max(v.abs())),
            mean_residual: mean,
            max_residual_deviation: inner.iter().fold(0.0, |m, v| m.max((v - mean).abs())),
            density_drift: ints.iter().fold(0.0, |m, v| m.max((v - ints[0]).abs())),
            scale,
        });
        density_integrals.push(ints);
        rhs_values.push(rhs);
        residuals.push(res);
    }
    Ok(DensityReport {
        times: recs.iter().map(|r| r.t).collect(),
        density_integrals,
        rhs_values,
        residuals,
        drift_metrics,
        capillary_energy: recs.iter().map(|r| r.capillary_energy).collect(),
        kinematic_condition: recs.iter().map(|r| r.kinematic_condition).collect(),
        collocation_condition: recs.iter().map(|r| r.collocation_condition).collect(),
        interior,
        amplitude,
    })
}

/// Value of one probe with the summed magnitudes of its terms.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ProbeValue {
    pub value: f64,
    pub magnitude: f64,
}

impl ProbeValue {
    pub fn passes(&self) -> bool {
        self.value.abs() <= PROBE_TOL * self.magnitude
    }
}

/// L1 sum of the selected part of a per-node complex integrand, and its integral.
fn part_integral(
    grid: &PeriodicGrid,
    spec: &TestFunctionSpec,
    vals: impl Iterator<Item = Complex64>,
) -> (f64, f64) {
    let (mut sum, mut abs) = (0.0, 0.0);
    for v in vals {
        let p = spec.part.of(v);
        sum += p;
        abs += p.abs();
    }
    (sum * grid.cell_area(), abs * grid.cell_area())
}

fn psi_grid(
    grid: &PeriodicGrid,
    spec: &TestFunctionSpec,
    z: impl Fn(usize, usize) -> f64,
) -> Vec<crate::testfn::PsiDerivatives> {
    let mut out = Vec::with_capacity(grid.len());
    for j in 0..grid.nx() {
        for l in 0..grid.ny() {
            out.push(spec.eval(grid.centred_x(j), grid.centred_y(l), z(j, l)));
        }
    }
    out
}

/// `int psi_z(x, y, eta) eta_t`, the time-differentiated term of the second
/// probe, with the L1 size of its integrand.
pub fn psi_z_flux(
    grid: &PeriodicGrid,
    state: &SurfaceState,
    eta_t: &SurfaceField,
    spec: &TestFunctionSpec,
) -> ProbeValue {
    let surf = psi_grid(grid, spec, |j, l| state.eta.get(j, l));
    let et = eta_t.as_slice();
    let (value, magnitude) =
        part_integral(grid, spec, surf.iter().zip(et).map(|(d, &e)| d.psi_z * e));
    ProbeValue { value, magnitude }
}

/// First weak-form probe:
/// `int psi_z eta_t - int (q_x psi_x + q_y psi_y) + int_bed phi psi_zz`.
pub fn nonlocal_residual_1(
    grid: &PeriodicGrid,
    state: &SurfaceState,
    eta_t: &SurfaceField,
    pot_phi: &ModalPotential,
    spec: &TestFunctionSpec,
) -> Result<ProbeValue> {
    state.check_grid(grid)?;
    let bed_z = SurfaceField::constant(grid, -grid.depth());
    let phi_b = sample_potential(grid, pot_phi, &bed_z)?.phi;
    Ok(residual_1_with_bed(grid, state, eta_t, &phi_b, spec))
}

fn residual_1_with_bed(
    grid: &PeriodicGrid,
    state: &SurfaceState,
    eta_t: &SurfaceField,
    phi_b: &SurfaceField,
    spec: &TestFunctionSpec,
) -> ProbeValue {
    let (qx, qy) = spectral_gradient(grid, &state.q);
    let surf = psi_grid(grid, spec, |j, l| state.eta.get(j, l));
    let bed = psi_grid(grid, spec, |_, _| -grid.depth());
    let n = grid.len();
    let t1 = part_integral(
        grid,
        spec,
        (0..n).map(|i| surf[i].psi_z * eta_t.as_slice()[i]),
    );
    let t2 = part_integral(
        grid,
        spec,
        (0..n).map(|i| surf[i].psi_x * qx.as_slice()[i] + surf[i].psi_y * qy.as_slice()[i]),
    );
    let t3 = part_integral(
        grid,
        spec,
        (0..n).map(|i| bed[i].psi_zz * phi_b.as_slice()[i]),
    );
    ProbeValue {
        value: t1.0 - t2.0 + t3.0,
        magnitude: t1.1 + t2.1 + t3.1,
    }
}

/// Second weak-form probe at one sample, given `d/dt int psi_z eta_t` and
/// the magnitude of that term:
/// `d/dt int psi_z eta_t
///   - int [q_t (psi_zz - psi_zx eta_x - psi_zy eta_y) + (q_x psi_zx + q_y psi_zy) eta_t]
///   + int_bed phi_t psi_zz`.
pub fn nonlocal_residual_2_at(
    grid: &PeriodicGrid,
    sample: &AuditSample,
    spec: &TestFunctionSpec,
    d_dt_flux: ProbeValue,
) -> ProbeValue {
    let state = &sample.state;
    let (qx, qy) = spectral_gradient(grid, &state.q);
    let (ex, ey) = spectral_gradient(grid, &state.eta);
    let surf = psi_grid(grid, spec, |j, l| state.eta.get(j, l));
    let bed = psi_grid(grid, spec, |_, _| -grid.depth());
    let n = grid.len();
    let (et, qt) = (sample.eta_t.as_slice(), sample.q_t.as_slice());
    let surface = part_integral(
        grid,
        spec,
        (0..n).map(|i| {
            let d = &surf[i];
            (d.psi_zz - d.psi_zx * ex.as_slice()[i] - d.psi_zy * ey.as_slice()[i]) * qt[i]
                + (d.psi_zx * qx.as_slice()[i] + d.psi_zy * qy.as_slice()[i]) * et[i]
        }),
    );
    let bottom = part_integral(
        grid,
        spec,
        (0..n).map(|i| bed[i].psi_zz * sample.bed.phi_t.as_slice()[i]),
    );
    ProbeValue {
        value: d_dt_flux.value - surface.0 + bottom.0,
        magnitude: d_dt_flux.magnitude + surface.1 + bottom.1,
    }
}

/// Both probes along a trajectory for one test function.
#[derive(Debug, Clone)]
pub struct ProbeSeries {
    pub spec: TestFunctionSpec,
    pub residual_1: Vec<ProbeValue>,
    /// Interior samples only, aligned with `interior`.
    pub residual_2: Vec<ProbeValue>,
    pub interior: Range<usize>,
}

/// Second probe over a trajectory; values are returned for interior samples.
pub fn nonlocal_residual_2(
    grid: &PeriodicGrid,
    samples: &[AuditSample],
    dt_s: f64,
    spec: &TestFunctionSpec,
) -> Result<Vec<ProbeValue>> {
    let flux: Vec<ProbeValue> = samples
        .iter()
        .map(|s| psi_z_flux(grid, &s.state, &s.eta_t, spec))
        .collect();
    let values: Vec<f64> = flux.iter().map(|f| f.value).collect();
    let d = fd_derivative(&values, dt_s)?;
    let n = samples.len();
    Ok((2..n - 2)
        .map(|i| {
            // stencil applied to magnitudes, before cancellation
            let m = &flux[i - 2..=i + 2];
            let magnitude =
                (m[0].magnitude + 8.0 * m[1].magnitude + 8.0 * m[3].magnitude + m[4].magnitude)
                    / (12.0 * dt_s);
            let term = ProbeValue {
                value: d[i],
                magnitude,
            };
            nonlocal_residual_2_at(grid, &samples[i], spec, term)
        })
        .collect())
}

/// Runs both probes for every spec.
pub fn probe_trajectory(
    grid: &PeriodicGrid,
    samples: &[AuditSample],
    dt_s: f64,
    specs: &[TestFunctionSpec],
) -> Result<Vec<ProbeSeries>> {
    specs
        .iter()
        .map(|spec| {
            let residual_1 = samples
                .iter()
                .map(|s| residual_1_with_bed(grid, &s.state, &s.eta_t, &s.bed.phi, spec))
                .collect();
            Ok(ProbeSeries {
                spec: *spec,
                residual_1,
                residual_2: nonlocal_residual_2(grid, samples, dt_s, spec)?,
                interior: 2..samples.len() - 2,
            })
        })
        .collect()
}
