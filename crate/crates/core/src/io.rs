//! File formats: signal, plane, ridge and density CSVs, PGM renders and the
//! JSON reports.

use ndarray::Array2;
use num_complex::Complex64;
use serde::Serialize;
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::reconstruct::{BandPolicy, ComponentSet};
use crate::ridge::RidgeSet;
use crate::signal::SampledSignal;
use crate::squeeze::SqueezeReport;

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        kind => Error::Parse {
            line,
            reason: format!("{kind:?}"),
        },
    }
}

/// Writes `time,real,imag`. Values use the shortest representation that
/// parses back to the same `f64`.
pub fn write_signal_csv<W: Write>(out: W, signal: &SampledSignal) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["time", "real", "imag"]).map_err(csv_error)?;
    for (n, z) in signal.samples().iter().enumerate() {
        w.write_record([signal.time(n).to_string(), z.re.to_string(), z.im.to_string()])
            .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn round_significant(x: f64, digits: i32) -> f64 {
    let scale = 10f64.powi(digits - 1 - x.abs().log10().floor() as i32);
    (x * scale).round() / scale
}

/// Sample rate from the time stamps. Candidates are the raw estimate, the
/// estimate rounded to 12 significant digits and the reciprocal of the
/// rounded period; the first that regenerates every stamp exactly wins, so
/// files written by [`write_signal_csv`] read back to the same rate.
fn infer_rate(times: &[f64]) -> Result<f64> {
    let n = times.len();
    let span = times[n - 1] - times[0];
    if !(span > 0.0) {
        return Err(Error::Parse {
            line: 2,
            reason: "time stamps must increase".into(),
        });
    }
    let raw = (n - 1) as f64 / span;
    let rounded = round_significant(raw, 12);
    let candidates = [rounded, 1.0 / round_significant(1.0 / raw, 12), raw];
    let regenerates = |rate: f64| {
        times
            .iter()
            .enumerate()
            .all(|(k, &t)| times[0] + k as f64 / rate == t)
    };
    if let Some(&rate) = candidates.iter().find(|&&r| regenerates(r)) {
        return Ok(rate);
    }
    for (k, &t) in times.iter().enumerate() {
        let expect = times[0] + k as f64 / rounded;
        if (t - expect).abs() > 1e-6 / rounded {
            return Err(Error::Parse {
                line: k + 2,
                reason: format!("time {t} breaks uniform sampling at rate {rounded}"),
            });
        }
    }
    Ok(rounded)
}

/// Reads a `time,real[,imag]` CSV with a mandatory header. A missing `imag`
/// column means a real signal.
pub fn read_signal_csv<R: Read>(input: R) -> Result<SampledSignal> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = r.headers().map_err(csv_error)?.clone();
    let column = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let missing = |name: &str| Error::Parse {
        line: 1,
        reason: format!("header lacks a `{name}` column"),
    };
    let t_col = column("time").ok_or_else(|| missing("time"))?;
    let re_col = column("real").ok_or_else(|| missing("real"))?;
    let im_col = column("imag");

    let mut times = Vec::new();
    let mut samples = Vec::new();
    for (i, record) in r.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(csv_error)?;
        let field = |col: usize, name: &str| -> Result<f64> {
            let text = record.get(col).ok_or_else(|| Error::Parse {
                line,
                reason: format!("missing `{name}` field"),
            })?;
            text.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse {
                    line,
                    reason: format!("`{name}` value `{text}` is not a finite number"),
                })
        };
        times.push(field(t_col, "time")?);
        let im = match im_col {
            Some(c) => field(c, "imag")?,
            None => 0.0,
        };
        samples.push(Complex64::new(field(re_col, "real")?, im));
    }
    if samples.len() < 2 {
        return Err(Error::Parse {
            line: samples.len() + 1,
            reason: "need at least two samples to infer the sample rate".into(),
        });
    }
    let rate = infer_rate(&times)?;
    SampledSignal::new(samples, rate, times[0])
}

/// Plane magnitudes: header `axis,t_0,t_1,...`, then one row per scale or
/// frequency starting with its axis value.
pub fn write_plane_csv<W: Write>(out: W, axis: &str, axis_values: &[f64], times: &[f64], values: &Array2<Complex64>) -> Result<()> {
    if values.dim() != (axis_values.len(), times.len()) {
        return Err(Error::GridMismatch(format!(
            "plane is {:?} but axes are {} x {}",
            values.dim(),
            axis_values.len(),
            times.len()
        )));
    }
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![axis.to_string()];
    header.extend(times.iter().map(f64::to_string));
    w.write_record(&header).map_err(csv_error)?;
    for (row, &a) in values.rows().into_iter().zip(axis_values) {
        let mut rec = vec![a.to_string()];
        rec.extend(row.iter().map(|z| z.norm().to_string()));
        w.write_record(&rec).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Dynamic range kept by the PGM renders: 160 dB below the interior maximum.
const PGM_FLOOR: f64 = 1e-8;

/// Binary PGM of `log |value|`, min-max normalized over cells outside the
/// cone of influence. Row 0 of the image is the lowest frequency, so
/// `rows_low_to_high` says whether the plane's rows already run that way.
pub fn write_pgm<W: Write>(mut out: W, values: &Array2<Complex64>, coi: &Array2<bool>, rows_low_to_high: bool) -> Result<()> {
    if values.dim() != coi.dim() {
        return Err(Error::GridMismatch("plane and mask shapes differ".into()));
    }
    let (rows, cols) = values.dim();
    let interior_max = values
        .iter()
        .zip(coi.iter())
        .filter(|(_, &c)| !c)
        .map(|(z, _)| z.norm())
        .fold(0.0, f64::max);
    let floor = interior_max * PGM_FLOOR;
    let level = |z: &Complex64| z.norm().max(floor).max(f64::MIN_POSITIVE).ln();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (z, &c) in values.iter().zip(coi.iter()) {
        if !c {
            let l = level(z);
            lo = lo.min(l);
            hi = hi.max(l);
        }
    }
    let mut pixels = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        let m = if rows_low_to_high { i } else { rows - 1 - i };
        for n in 0..cols {
            let p = if interior_max > 0.0 && hi > lo {
                ((level(&values[[m, n]]) - lo) / (hi - lo)).clamp(0.0, 1.0) * 255.0
            } else {
                0.0
            };
            pixels.push(p.round() as u8);
        }
    }
    write!(out, "P5\n{cols} {rows}\n255\n")?;
    out.write_all(&pixels)?;
    Ok(())
}

/// `ridge_id,time,frequency,magnitude`, ridges numbered in mean-frequency order.
pub fn write_ridges_csv<W: Write>(out: W, ridges: &RidgeSet) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["ridge_id", "time", "frequency", "magnitude"]).map_err(csv_error)?;
    for (id, r) in ridges.ridges.iter().enumerate() {
        for i in 0..r.len() {
            w.write_record([
                id.to_string(),
                ridges.times[r.start + i].to_string(),
                r.freqs[i].to_string(),
                r.magnitudes[i].to_string(),
            ])
            .map_err(csv_error)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `time,density`.
pub fn write_density_csv<W: Write>(out: W, times: &[f64], density: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["time", "density"]).map_err(csv_error)?;
    for (t, d) in times.iter().zip(density) {
        w.write_record([t.to_string(), d.to_string()]).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// `time,value` pairs, used for ground-truth instantaneous frequencies.
pub fn write_series_csv<W: Write>(out: W, header: [&str; 2], times: &[f64], values: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(csv_error)?;
    for (t, v) in times.iter().zip(values) {
        w.write_record([t.to_string(), v.to_string()]).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_report_json<W: Write>(mut out: W, report: &SqueezeReport) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, report)?;
    writeln!(out)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifestEntry {
    pub component_id: usize,
    pub band_policy: BandPolicy,
    /// Component energy over input energy.
    pub energy_fraction: f64,
    /// Time columns where this component's band overlaps another's.
    pub overlap_flags: Vec<usize>,
    /// Time columns where the ridge is absent and the component is zero.
    pub missing_columns: Vec<usize>,
}

/// One entry per component; energies are those of the signals actually
/// written (`2 Re` for real inputs).
pub fn manifest(components: &ComponentSet, signal: &SampledSignal, written: &[SampledSignal]) -> Vec<ManifestEntry> {
    let total = signal.energy();
    components
        .components
        .iter()
        .zip(written)
        .enumerate()
        .map(|(k, (c, s))| ManifestEntry {
            component_id: k,
            band_policy: components.policy,
            energy_fraction: if total > 0.0 { s.energy() / total } else { 0.0 },
            overlap_flags: c.overlap.iter().enumerate().filter(|(_, &o)| o).map(|(n, _)| n).collect(),
            missing_columns: c.missing.iter().enumerate().filter(|(_, &m)| m).map(|(n, _)| n).collect(),
        })
        .collect()
}

pub fn write_manifest_json<W: Write>(mut out: W, entries: &[ManifestEntry]) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, entries)?;
    writeln!(out)?;
    Ok(())
}
