//! Binary snapshots, trajectories and the CSV audit report.
//!
//! Snapshot layout, little-endian:
//! `b"WVLW"`, `u32` version, then `f64` values
//! `lx ly nx ny depth gravity density surface_tension t`,
//! then `eta` and `q` in row-major node order.
//! A trajectory file is a concatenation of snapshots.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::audit::{DensityReport, LAW_COUNT};
use crate::error::{Error, Result};
use crate::field::{SurfaceField, SurfaceState};
use crate::grid::{make_grid, GridParams, PeriodicGrid};

pub const SNAPSHOT_MAGIC: [u8; 4] = *b"WVLW";
pub const SNAPSHOT_VERSION: u32 = 1;
const HEADER_F64S: usize = 9;

pub fn write_snapshot<W: Write>(
    w: &mut W,
    grid: &PeriodicGrid,
    state: &SurfaceState,
) -> Result<()> {
    state.check_grid(grid)?;
    let p = grid.params();
    w.write_all(&SNAPSHOT_MAGIC)?;
    w.write_all(&SNAPSHOT_VERSION.to_le_bytes())?;
    let header = [
        p.lx,
        p.ly,
        p.nx as f64,
        p.ny as f64,
        p.depth,
        p.gravity,
        p.density,
        p.surface_tension,
        state.t,
    ];
    for v in header
        .iter()
        .chain(state.eta.as_slice())
        .chain(state.q.as_slice())
    {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

/// Reads one snapshot; `Ok(None)` at a clean end of stream.
pub fn read_snapshot<R: Read>(r: &mut R) -> Result<Option<(PeriodicGrid, SurfaceState)>> {
    let mut magic = [0u8; 4];
    let got = read_up_to(r, &mut magic)?;
    if got == 0 {
        return Ok(None);
    }
    if got < 4 || magic != SNAPSHOT_MAGIC {
        return Err(Error::BadSnapshot("missing magic".into()));
    }
    let mut word = [0u8; 4];
    r.read_exact(&mut word).map_err(truncated)?;
    let version = u32::from_le_bytes(word);
    if version != SNAPSHOT_VERSION {
        return Err(Error::BadSnapshot(format!("unsupported version {version}")));
    }
    let mut header = [0.0; HEADER_F64S];
    for v in header.iter_mut() {
        *v = read_f64(r)?;
    }
    let as_count = |v: f64, name: &str| {
        if v >= 0.0 && v.fract() == 0.0 && v <= 1e6 {
            Ok(v as usize)
        } else {
            Err(Error::BadSnapshot(format!(
                "{name} = {v} is not a node count"
            )))
        }
    };
    let params = GridParams {
        lx: header[0],
        ly: header[1],
        nx: as_count(header[2], "nx")?,
        ny: as_count(header[3], "ny")?,
        depth: header[4],
        gravity: header[5],
        density: header[6],
        surface_tension: header[7],
    };
    let grid = make_grid(params).map_err(|e| Error::BadSnapshot(e.to_string()))?;
    let n = grid.len();
    let mut read_field = || -> Result<SurfaceField> {
        let mut v = Vec::with_capacity(n);
        for _ in 0..n {
            v.push(read_f64(r)?);
        }
        SurfaceField::from_vec(&grid, v)
    };
    let eta = read_field()?;
    let q = read_field()?;
    Ok(Some((grid.clone(), SurfaceState::new(eta, q, header[8]))))
}

fn truncated(e: std::io::Error) -> Error {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        Error::BadSnapshot("truncated record".into())
    } else {
        Error::Io(e)
    }
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(truncated)?;
    Ok(f64::from_le_bytes(b))
}

fn read_up_to<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(k) => filled += k,
            Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(filled)
}

pub fn save_snapshot(path: &Path, grid: &PeriodicGrid, state: &SurfaceState) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_snapshot(&mut w, grid, state)?;
    w.flush()?;
    Ok(())
}

pub fn load_snapshot(path: &Path) -> Result<(PeriodicGrid, SurfaceState)> {
    let mut r = BufReader::new(File::open(path)?);
    read_snapshot(&mut r)?.ok_or_else(|| Error::BadSnapshot("empty file".into()))
}

/// Reads every snapshot of a trajectory file; all must share one grid.
pub fn load_trajectory(path: &Path) -> Result<(PeriodicGrid, Vec<SurfaceState>)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut grid: Option<PeriodicGrid> = None;
    let mut states = Vec::new();
    while let Some((g, s)) = read_snapshot(&mut r)? {
        match &grid {
            Some(g0) if *g0 != g => {
                return Err(Error::InvalidTrajectory(format!(
                    "record {} has a different grid",
                    states.len()
                )))
            }
            Some(_) => {}
            None => grid = Some(g),
        }
        states.push(s);
    }
    let grid = grid.ok_or_else(|| Error::InvalidTrajectory("no records".into()))?;
    Ok((grid, states))
}

/// Units of `int T_i dx dy` for `i = 1..=12`.
pub const DENSITY_UNITS: [&str; LAW_COUNT] = [
    "m^4/s", "m^4/s", "m^5/s^2", "m^3", "m^4/s", "m^4", "m^4", "m^4", "m^5/s", "m^5/s", "m^5/s",
    "m^5/s",
];

fn rate_unit(u: &str) -> String {
    match u.strip_suffix("/s") {
        Some(base) => format!("{base}/s^2"),
        None => match u.strip_suffix("/s^2") {
            Some(base) => format!("{base}/s^3"),
            None => format!("{u}/s"),
        },
    }
}

/// Header row of the CSV report.
pub fn report_header() -> String {
    let mut cols = vec!["time[s]".to_string()];
    for (i, u) in DENSITY_UNITS.iter().enumerate() {
        cols.push(format!("int_T{}[{u}]", i + 1));
    }
    for (i, u) in DENSITY_UNITS.iter().enumerate() {
        cols.push(format!("rhs{}[{}]", i + 1, rate_unit(u)));
    }
    for (i, u) in DENSITY_UNITS.iter().enumerate() {
        cols.push(format!("residual{}[{}]", i + 1, rate_unit(u)));
    }
    cols.push("int_capillary_energy[m^5/s^2]".into());
    cols.push("cond_kinematic[1]".into());
    cols.push("cond_collocation[1]".into());
    cols.push("interior[1]".into());
    cols.join(",")
}

pub fn write_report<W: Write>(w: &mut W, report: &DensityReport) -> Result<()> {
    writeln!(w, "{}", report_header())?;
    for (s, t) in report.times.iter().enumerate() {
        let mut row = vec![format!("{t:.17e}")];
        for series in [
            &report.density_integrals,
            &report.rhs_values,
            &report.residuals,
        ] {
            for law in series.iter() {
                row.push(format!("{:.17e}", law[s]));
            }
        }
        row.push(format!("{:.17e}", report.capillary_energy[s]));
        row.push(format!("{:.6e}", report.kinematic_condition[s]));
        row.push(format!("{:.6e}", report.collocation_condition[s]));
        row.push(u8::from(report.interior.contains(&s)).to_string());
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn save_report(path: &Path, report: &DensityReport) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_report(&mut w, report)?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn sample() -> (PeriodicGrid, SurfaceState) {
        let g = make_grid(GridParams {
            nx: 8,
            ny: 6,
            surface_tension: 0.07,
            ..GridParams::default()
        })
        .unwrap();
        let eta = SurfaceField::from_fn(&g, |x, y| 1e-3 * (x + y).sin());
        let q = SurfaceField::from_fn(&g, |x, y| 2e-3 * (x - 2.0 * y).cos());
        (g, SurfaceState::new(eta, q, 0.125))
    }

    #[test]
    fn snapshot_round_trip_is_bitwise() {
        let (g, s) = sample();
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &g, &s).unwrap();
        assert_eq!(&buf[..4], b"WVLW");
        assert_eq!(buf.len(), 8 + 8 * (9 + 2 * 48));
        let (g2, s2) = read_snapshot(&mut Cursor::new(&buf)).unwrap().unwrap();
        assert_eq!(g2, g);
        assert_eq!(s2, s);
    }

    #[test]
    fn corrupt_snapshots_are_rejected() {
        let (g, s) = sample();
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &g, &s).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(
            read_snapshot(&mut Cursor::new(&bad)),
            Err(Error::BadSnapshot(_))
        ));
        let short = &buf[..buf.len() - 3];
        assert!(matches!(
            read_snapshot(&mut Cursor::new(short)),
            Err(Error::BadSnapshot(_))
        ));
        let mut v2 = buf.clone();
        v2[4] = 2;
        assert!(read_snapshot(&mut Cursor::new(&v2)).is_err());
        assert!(read_snapshot(&mut Cursor::new(Vec::<u8>::new()))
            .unwrap()
            .is_none());
    }

    #[test]
    fn header_names_every_column_with_units() {
        let h = report_header();
        let cols: Vec<&str> = h.split(',').collect();
        assert_eq!(cols.len(), 1 + 3 * LAW_COUNT + 4);
        assert!(cols.iter().all(|c| c.ends_with(']') && c.contains('[')));
        assert!(
            h.contains("int_T3[m^5/s^2]")
                && h.contains("rhs3[m^5/s^3]")
                && h.contains("rhs4[m^3/s]")
        );
    }
}
