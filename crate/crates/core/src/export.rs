//! CSV readers and writers. Floats are written with 17 significant digits so
//! that they read back bit-for-bit.

use std::io::{Read, Write};

use crate::analysis::{CycleStats, HysteresisLoop, Summary};
use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::lz::{EigenTriple, ScatteringData};
use crate::model::{BlochState, CpReport};
use crate::spectral::{EnvelopeComparison, SpectralSample};

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

fn write_rows<W: Write>(w: W, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut out = writer(w);
    out.write_record(header)?;
    for row in rows {
        out.write_record(&row)?;
    }
    out.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn write_trajectory<W: Write>(w: W, traj: &Trajectory) -> Result<()> {
    let omega0 = traj.omega0();
    write_rows(
        w,
        &["t", "x", "y", "z", "omega0"],
        traj.times.iter().zip(&traj.states).zip(omega0).map(|((t, s), b)| {
            vec![fmt_f64(*t), fmt_f64(s.x), fmt_f64(s.y), fmt_f64(s.z), fmt_f64(b)]
        }),
    )
}

pub fn write_events<W: Write>(w: W, events: &[f64]) -> Result<()> {
    write_rows(w, &["t_zero"], events.iter().map(|t| vec![fmt_f64(*t)]))
}

pub fn write_scattering<W: Write>(w: W, rows: &[ScatteringData]) -> Result<()> {
    write_rows(
        w,
        &["nu", "theta", "phi", "T"],
        rows.iter().map(|s| {
            vec![
                fmt_f64(s.nu),
                fmt_f64(s.theta),
                fmt_f64(s.phi),
                fmt_f64(s.transfer_ratio()),
            ]
        }),
    )
}

pub fn write_eigen<W: Write>(w: W, rows: &[(f64, EigenTriple)]) -> Result<()> {
    write_rows(
        w,
        &["t", "re_p1", "im_p1", "re_p2", "im_p2", "re_p3", "im_p3"],
        rows.iter().map(|(t, e)| {
            let mut row = vec![fmt_f64(*t)];
            for p in e.p {
                row.push(fmt_f64(p.re));
                row.push(fmt_f64(p.im));
            }
            row
        }),
    )
}

pub fn write_spectrum<W: Write>(w: W, samples: &[SpectralSample]) -> Result<()> {
    write_rows(
        w,
        &["omega", "re", "im", "abs"],
        samples.iter().map(|s| {
            vec![
                fmt_f64(s.omega),
                fmt_f64(s.value.re),
                fmt_f64(s.value.im),
                fmt_f64(s.value.norm()),
            ]
        }),
    )
}

/// Measured and scaled asymptotic moduli with their envelopes.
pub fn write_overlay<W: Write>(w: W, c: &EnvelopeComparison) -> Result<()> {
    write_rows(
        w,
        &["omega", "measured_abs", "model_abs", "measured_envelope", "model_envelope"],
        (0..c.omega.len()).map(|i| {
            vec![
                fmt_f64(c.omega[i]),
                fmt_f64(c.measured[i]),
                fmt_f64(c.model[i]),
                fmt_f64(c.measured_envelope[i]),
                fmt_f64(c.model_envelope[i]),
            ]
        }),
    )
}

pub fn write_loops<W: Write>(w: W, loops: &[HysteresisLoop]) -> Result<()> {
    write_rows(
        w,
        &["cycle", "b", "z"],
        loops.iter().flat_map(|l| {
            l.points
                .iter()
                .map(move |(b, z)| vec![l.cycle_index.to_string(), fmt_f64(*b), fmt_f64(*z)])
        }),
    )
}

/// Per-cycle table; `areas` and `asymmetry` may be shorter than `stats`
/// (they need two cycles), missing cells are written as NaN.
pub fn write_stats<W: Write>(w: W, stats: &[CycleStats], areas: &[f64], asymmetry: &[f64]) -> Result<()> {
    write_rows(
        w,
        &["cycle", "z_mean", "z_min", "z_max", "n_kinks", "area", "asymmetry"],
        stats.iter().map(|c| {
            let i = c.cycle_index;
            vec![
                i.to_string(),
                fmt_f64(c.z_mean),
                fmt_f64(c.z_min),
                fmt_f64(c.z_max),
                c.kink_times.len().to_string(),
                fmt_f64(areas.get(i).copied().unwrap_or(f64::NAN)),
                fmt_f64(asymmetry.get(i).copied().unwrap_or(f64::NAN)),
            ]
        }),
    )
}

pub fn write_cp_report<W: Write>(w: W, report: &CpReport) -> Result<()> {
    write_rows(
        w,
        &["id", "residual", "pass"],
        report
            .checks
            .iter()
            .map(|c| vec![c.id.to_string(), fmt_f64(c.residual), c.pass.to_string()]),
    )
}

pub fn summary_header(first: &str) -> Vec<String> {
    std::iter::once(first.to_string())
        .chain(Summary::HEADER.iter().map(|s| s.to_string()))
        .collect()
}

pub fn summary_row(first: String, s: &Summary) -> Vec<String> {
    vec![
        first,
        fmt_f64(s.z_final),
        fmt_f64(s.z_mean),
        fmt_f64(s.z_min),
        fmt_f64(s.z_max),
        s.n_kinks.to_string(),
        fmt_f64(s.mean_area),
        fmt_f64(s.mean_asymmetry),
    ]
}

pub fn write_summaries<W: Write>(w: W, first: &str, rows: &[(String, Summary)]) -> Result<()> {
    let header = summary_header(first);
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    write_rows(
        w,
        &header,
        rows.iter().map(|(k, s)| summary_row(k.clone(), s)),
    )
}

/// Samples read back from a trajectory CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryTable {
    pub times: Vec<f64>,
    pub states: Vec<BlochState>,
    pub omega0: Vec<f64>,
}

pub fn read_trajectory<R: Read>(r: R) -> Result<TrajectoryTable> {
    let mut rdr = csv::Reader::from_reader(r);
    let header = rdr.headers()?.clone();
    let expected = ["t", "x", "y", "z", "omega0"];
    if header.iter().collect::<Vec<_>>() != expected {
        return Err(Error::Validation(format!(
            "trajectory CSV header must be {}, got {}",
            expected.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut table = TrajectoryTable {
        times: Vec::new(),
        states: Vec::new(),
        omega0: Vec::new(),
    };
    for (line, record) in rdr.records().enumerate() {
        let record = record?;
        let parse = |i: usize| -> Result<f64> {
            record[i].trim().parse::<f64>().map_err(|e| {
                Error::Validation(format!("row {}: column {}: {e}", line + 2, expected[i]))
            })
        };
        table.times.push(parse(0)?);
        table.states.push(BlochState::new(parse(1)?, parse(2)?, parse(3)?));
        table.omega0.push(parse(4)?);
    }
    Ok(table)
}
