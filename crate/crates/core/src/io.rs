//! CSV and JSON formats shared by the library and the command line.
//!
//! Floats are written with 17 significant digits so that output is
//! reproducible bit for bit.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::S3Point;
use crate::hamiltonian::{hamiltonian_hyper, hamiltonian_value, HyperPhaseState, PhaseState, Trajectory};
use crate::hopf::{BaseCurve, S2Point, SampledCurve};

/// Canonical float formatting.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_rows<W: Write>(out: W, header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.into_iter().map(fmt_f64))?;
    }
    w.flush()?;
    Ok(())
}

pub const TRAJECTORY_HEADER: [&str; 14] = [
    "s", "x1", "x2", "x3", "x4", "xi1", "xi2", "xi3", "xi4", "a", "b", "c", "H", "norm_drift",
];

pub fn write_trajectory_csv<W: Write>(out: W, traj: &Trajectory<PhaseState>) -> Result<()> {
    let rows = traj
        .samples
        .iter()
        .map(|smp| -> Result<Vec<f64>> {
            let st = &smp.state;
            let fc = st.velocity_coeffs();
            let h = hamiltonian_value(st)?;
            let mut row = vec![smp.s];
            row.extend_from_slice(&st.x);
            row.extend_from_slice(&st.xi.0);
            row.extend_from_slice(&[fc.a, fc.b, fc.c, h, smp.monitors.norm_drift]);
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    write_rows(out, &TRAJECTORY_HEADER, rows.into_iter())
}

pub const HYPER_TRAJECTORY_HEADER: [&str; 13] = [
    "s", "xi1", "xi2", "eta", "psi1", "psi2", "theta", "x1", "x2", "x3", "x4", "H", "h_drift",
];

pub fn write_hyper_trajectory_csv<W: Write>(out: W, traj: &Trajectory<HyperPhaseState>) -> Result<()> {
    let rows = traj
        .samples
        .iter()
        .map(|smp| -> Result<Vec<f64>> {
            let st = &smp.state;
            let mut row = vec![smp.s, st.xi1, st.xi2, st.eta, st.psi1, st.psi2, st.theta];
            row.extend_from_slice(&st.point());
            row.extend_from_slice(&[hamiltonian_hyper(st)?, smp.monitors.h_drift]);
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    write_rows(out, &HYPER_TRAJECTORY_HEADER, rows.into_iter())
}

/// A sampled point of a curve in `S³`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub s: f64,
    pub x: S3Point,
}

pub fn write_path_csv<W: Write>(out: W, path: &[PathSample]) -> Result<()> {
    write_rows(
        out,
        &["s", "x1", "x2", "x3", "x4"],
        path.iter().map(|p| {
            let mut row = vec![p.s];
            row.extend_from_slice(p.x.as_array());
            row
        }),
    )
}

/// Reads `s,x1,x2,x3,x4` rows; the points must be unit to `tol`.
pub fn read_path_csv<R: Read>(input: R, tol: f64) -> Result<Vec<PathSample>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let mut out = Vec::new();
    for rec in rdr.records() {
        let v = parse_record(&rec?, 5)?;
        out.push(PathSample {
            s: v[0],
            x: S3Point::with_tolerance([v[1], v[2], v[3], v[4]], tol)?,
        });
    }
    if out.is_empty() {
        return Err(Error::EmptyInput("path file has no rows"));
    }
    Ok(out)
}

/// Closed-form geodesic samples with the parameters that produced them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeodesicDump {
    pub family: String,
    pub parameters: serde_json::Value,
    pub samples: Vec<PathSample>,
}

pub fn write_json<W: Write, T: Serialize>(mut out: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn parse_record(rec: &csv::StringRecord, n: usize) -> Result<Vec<f64>> {
    if rec.len() != n {
        return Err(Error::Parse(format!(
            "line {}: expected {n} fields, found {}",
            rec.position().map_or(0, |p| p.line()),
            rec.len()
        )));
    }
    rec.iter()
        .map(|f| {
            f.parse::<f64>().map_err(|_| {
                Error::Parse(format!(
                    "line {}: not a number: {f:?}",
                    rec.position().map_or(0, |p| p.line())
                ))
            })
        })
        .collect()
}

/// Reads a loop file with header `t,u1,u2,u3`. Points are normalized when
/// they are unit to `1e-9` (text round-off) and rejected otherwise.
pub fn read_loop_csv<R: Read>(input: R) -> Result<SampledCurve> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let mut samples = Vec::new();
    for rec in rdr.records() {
        let v = parse_record(&rec?, 4)?;
        let u = [v[1], v[2], v[3]];
        let norm = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
        if !((norm - 1.0).abs() <= 1e-9) {
            return Err(Error::NonUnitInput { norm, tol: 1e-9 });
        }
        samples.push((v[0], S2Point::normalized(u)?));
    }
    if samples.is_empty() {
        return Err(Error::EmptyInput("loop file has no rows"));
    }
    SampledCurve::new(samples)
}

pub fn write_s2_csv<W: Write>(out: W, samples: impl Iterator<Item = (f64, S2Point)>) -> Result<()> {
    write_rows(
        out,
        &["t", "u1", "u2", "u3"],
        samples.map(|(t, u)| vec![t, u.as_array()[0], u.as_array()[1], u.as_array()[2]]),
    )
}

pub fn write_loop_csv<W: Write>(out: W, curve: &SampledCurve) -> Result<()> {
    write_s2_csv(out, curve.samples())
}

/// Samples any base curve at its breakpoints.
pub fn base_curve_samples(curve: &dyn BaseCurve) -> Result<Vec<(f64, S2Point)>> {
    curve
        .breakpoints()
        .iter()
        .map(|&t| Ok((t, S2Point::normalized(curve.point(t))?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodesics::{geodesic_bc, GeodesicParam};
    use crate::hamiltonian::{integrate, Covector, IntegrateOptions};
    use crate::ode::OutputGrid;

    #[test]
    fn float_format_round_trips() {
        for &v in &[0.1, -1.0 / 3.0, 1e-300, 6.02e23, 0.0] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn trajectory_csv_shape() {
        let opts = IntegrateOptions {
            output: OutputGrid::Uniform(0.5),
            ..Default::default()
        };
        let traj = integrate(&S3Point::IDENTITY, &Covector::at_identity(0.0, 0.3, 0.2), 1.0, &opts).unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &traj).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], TRAJECTORY_HEADER.join(","));
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("0.0000000000000000e0,1.0000000000000000e0"));
    }

    #[test]
    fn path_round_trip() {
        let param = GeodesicParam::at_identity(0.8, -0.3);
        let path: Vec<_> = (0..5)
            .map(|i| {
                let s = 0.3 * i as f64;
                PathSample { s, x: geodesic_bc(&param, s) }
            })
            .collect();
        let mut buf = Vec::new();
        write_path_csv(&mut buf, &path).unwrap();
        let back = read_path_csv(buf.as_slice(), 1e-12).unwrap();
        assert_eq!(back, path);
    }

    #[test]
    fn loop_round_trip_and_errors() {
        let samples: Vec<_> = (0..=40)
            .map(|i| {
                let a = std::f64::consts::TAU * i as f64 / 40.0;
                (i as f64 / 40.0, S2Point::normalized([a.cos(), a.sin(), 0.0]).unwrap())
            })
            .collect();
        let curve = SampledCurve::new(samples).unwrap();
        let mut buf = Vec::new();
        write_loop_csv(&mut buf, &curve).unwrap();
        let back = read_loop_csv(buf.as_slice()).unwrap();
        assert_eq!(back.len(), curve.len());
        for ((t0, u0), (t1, u1)) in back.samples().zip(curve.samples()) {
            assert_eq!(t0, t1);
            assert!(u0.angle_to(&u1) < 1e-15);
        }

        let bad = "t,u1,u2,u3\n0,1,0,0\n1,2,0,0\n";
        assert_eq!(read_loop_csv(bad.as_bytes()).unwrap_err().name(), "NonUnitInput");
        let junk = "t,u1,u2,u3\n0,1,0,zero\n";
        assert_eq!(read_loop_csv(junk.as_bytes()).unwrap_err().name(), "Parse");
        let short = "t,u1,u2,u3\n0,1,0\n";
        assert!(read_loop_csv(short.as_bytes()).is_err());
    }
}
