//! Phase transform and synchrosqueezing reassignment.
//!
//! Reassignment uses the zero-width limit of the smoothing kernel: every
//! cell that passes the magnitude threshold moves its weighted value into
//! the output bin nearest its phase-transform frequency. Mass in each time
//! column is only relocated, never created or lost, except for cells whose
//! frequency falls outside the target grid, which are dropped and counted.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{invalid, Error, Result};
use crate::transform::{Backend, Coi, FrequencyGrid, TimeFrequencyPlane, TimeScalePlane};

/// A transform plane that can be squeezed: CWT (rows are scales) or modified
/// STFT (rows are frequencies).
pub trait SourcePlane {
    fn values(&self) -> &Array2<Complex64>;
    fn times(&self) -> &[f64];
    /// Scale `a` for CWT rows, frequency `z` for STFT rows; the band limit
    /// `[1/M, M]` is applied to this coordinate.
    fn row_coordinate(&self, row: usize) -> f64;
    /// Quadrature weight of a row: `a^(-3/2) da` for the CWT, `dz` for the STFT.
    fn row_weight(&self, row: usize) -> f64;
    fn default_target_grid(&self) -> FrequencyGrid;
    fn coi_rule(&self) -> Coi;
    /// Index of the row at the finest time resolution (highest frequency).
    fn finest_row(&self) -> usize;
}

impl SourcePlane for TimeScalePlane {
    fn values(&self) -> &Array2<Complex64> {
        TimeScalePlane::values(self)
    }
    fn times(&self) -> &[f64] {
        TimeScalePlane::times(self)
    }
    fn row_coordinate(&self, row: usize) -> f64 {
        self.scales()[row]
    }
    fn row_weight(&self, row: usize) -> f64 {
        self.scales()[row].powf(-1.5) * self.scale_step(row)
    }
    fn default_target_grid(&self) -> FrequencyGrid {
        TimeScalePlane::default_target_grid(self)
    }
    fn coi_rule(&self) -> Coi {
        TimeScalePlane::coi_rule(self)
    }
    fn finest_row(&self) -> usize {
        0
    }
}

impl SourcePlane for TimeFrequencyPlane {
    fn values(&self) -> &Array2<Complex64> {
        TimeFrequencyPlane::values(self)
    }
    fn times(&self) -> &[f64] {
        TimeFrequencyPlane::times(self)
    }
    fn row_coordinate(&self, row: usize) -> f64 {
        self.freqs()[row]
    }
    fn row_weight(&self, row: usize) -> f64 {
        self.grid().width(row)
    }
    fn default_target_grid(&self) -> FrequencyGrid {
        self.grid().clone()
    }
    fn coi_rule(&self) -> Coi {
        TimeFrequencyPlane::coi_rule(self)
    }
    fn finest_row(&self) -> usize {
        self.freqs().len() - 1
    }
}

/// Local frequency estimate per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePlane {
    /// `Re[dW / (2 pi i W)]`; NaN where masked.
    pub omega: Array2<f64>,
    /// `Im[dW / (2 pi i W)]`; zero for exact AM-FM cells, NaN where masked.
    pub residue: Array2<f64>,
    /// True where `|W| > threshold`.
    pub valid: Array2<bool>,
    pub threshold: f64,
}

impl PhasePlane {
    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }
}

/// `omega = Re[derivative / (2 pi i value)]` on cells with `|value| > threshold`.
pub fn phase_transform(
    values: &Array2<Complex64>,
    derivative: &Array2<Complex64>,
    threshold: f64,
) -> Result<PhasePlane> {
    if values.dim() != derivative.dim() {
        return Err(Error::GridMismatch(format!(
            "value plane is {:?} but derivative plane is {:?}",
            values.dim(),
            derivative.dim()
        )));
    }
    if !(threshold >= 0.0) {
        return Err(invalid("epsilon", format!("threshold must be non-negative, got {threshold}")));
    }
    let dim = values.dim();
    let mut omega = Array2::from_elem(dim, f64::NAN);
    let mut residue = Array2::from_elem(dim, f64::NAN);
    let mut valid = Array2::from_elem(dim, false);
    for ((idx, &v), &d) in values.indexed_iter().zip(derivative.iter()) {
        if v.norm() > threshold {
            let q = d / (Complex64::new(0.0, TAU) * v);
            omega[idx] = q.re;
            residue[idx] = q.im;
            valid[idx] = true;
        }
    }
    Ok(PhasePlane {
        omega,
        residue,
        valid,
        threshold,
    })
}

/// Convenience wrapper checking that both planes come from the same grid.
pub fn phase_transform_of<P: SourcePlane>(plane: &P, derivative: &P, threshold: f64) -> Result<PhasePlane> {
    if plane.times() != derivative.times() {
        return Err(Error::GridMismatch("value and derivative planes have different time grids".into()));
    }
    phase_transform(plane.values(), derivative.values(), threshold)
}

/// How the magnitude threshold is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", content = "value", rename_all = "kebab-case")]
pub enum Threshold {
    /// Fixed threshold in plane-magnitude units.
    Absolute(f64),
    /// Fraction of the largest plane magnitude.
    Relative(f64),
    /// `3 MAD(|finest row|) / 0.6745`, a robust noise-level estimate.
    NoiseAdaptive,
}

impl Default for Threshold {
    fn default() -> Self {
        Threshold::Relative(1e-6)
    }
}

impl Threshold {
    pub fn resolve<P: SourcePlane>(&self, plane: &P) -> Result<f64> {
        let t = match *self {
            Threshold::Absolute(v) => v,
            Threshold::Relative(r) => r * plane.values().iter().map(|z| z.norm()).fold(0.0, f64::max),
            Threshold::NoiseAdaptive => {
                let row = plane.values().row(plane.finest_row());
                let mags: Vec<f64> = row.iter().map(|z| z.norm()).collect();
                3.0 * median_absolute_deviation(&mags) / 0.6745
            }
        };
        if !(t >= 0.0 && t.is_finite()) {
            return Err(invalid("epsilon", format!("threshold must be non-negative and finite, got {t}")));
        }
        Ok(t)
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n == 0 {
        return 0.0;
    }
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

pub(crate) fn median_absolute_deviation(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    let med = median(&mut v);
    let mut dev: Vec<f64> = values.iter().map(|x| (x - med).abs()).collect();
    median(&mut dev)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SqueezeConfig {
    pub threshold: Threshold,
    /// Rows with coordinate outside `[1/M, M]` are ignored. `None` covers
    /// the whole computed grid.
    pub band_limit: Option<f64>,
    /// Output bins; `None` uses the source plane's natural grid.
    pub target: Option<FrequencyGrid>,
}


#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezeReport {
    /// Dropped share of the total contributing magnitude `sum |weight * value|`.
    pub dropped_fraction: f64,
    pub n_dropped_cells: usize,
}

#[derive(Debug, Clone)]
pub struct Squeezed {
    /// Density over the target grid: the mass reassigned to bin `m` divided
    /// by the bin width.
    pub plane: TimeFrequencyPlane,
    pub report: SqueezeReport,
    pub threshold: f64,
    pub band_limit: f64,
}

/// Smallest `M` for which `[1/M, M]` covers every row coordinate.
pub fn covering_band_limit<P: SourcePlane>(plane: &P) -> f64 {
    let rows = plane.values().nrows();
    (0..rows)
        .map(|r| {
            let c = plane.row_coordinate(r);
            c.max(1.0 / c)
        })
        .fold(1.0, f64::max)
        * (1.0 + 1e-12)
}

/// Reassigns `weight(row) * value` of every admissible cell to the output bin
/// nearest its phase-transform frequency.
pub fn squeeze<P: SourcePlane>(plane: &P, phase: &PhasePlane, config: &SqueezeConfig) -> Result<Squeezed> {
    let values = plane.values();
    if phase.omega.dim() != values.dim() {
        return Err(Error::GridMismatch(format!(
            "phase plane is {:?} but source plane is {:?}",
            phase.omega.dim(),
            values.dim()
        )));
    }
    let threshold = config.threshold.resolve(plane)?;
    let band_limit = match config.band_limit {
        Some(m) if m > 1.0 => m,
        Some(m) => return Err(invalid("band_limit", format!("M must exceed 1, got {m}"))),
        None => covering_band_limit(plane),
    };
    let target = config.target.clone().unwrap_or_else(|| plane.default_target_grid());
    let widths = target.widths();
    let (rows, cols) = values.dim();
    let in_band: Vec<Option<f64>> = (0..rows)
        .map(|r| {
            let c = plane.row_coordinate(r);
            (c >= 1.0 / band_limit && c <= band_limit).then(|| plane.row_weight(r))
        })
        .collect();

    let mut out = Array2::<Complex64>::zeros((target.len(), cols));
    let mut total = 0.0;
    let mut dropped = 0.0;
    let mut n_dropped = 0;
    for n in 0..cols {
        for (r, weight) in in_band.iter().enumerate() {
            let Some(weight) = *weight else { continue };
            let v = values[[r, n]];
            if !phase.valid[[r, n]] || v.norm() <= threshold {
                continue;
            }
            let mass = v * weight;
            total += mass.norm();
            let omega = phase.omega[[r, n]];
            match (omega > 0.0).then(|| target.locate(omega)).flatten() {
                Some(m) => out[[m, n]] += mass,
                None => {
                    dropped += mass.norm();
                    n_dropped += 1;
                }
            }
        }
    }
    for (mut row, w) in out.rows_mut().into_iter().zip(&widths) {
        row.mapv_inplace(|z| z / *w);
    }
    let plane = TimeFrequencyPlane::new(out, target, plane.times().to_vec(), plane.coi_rule())?;
    Ok(Squeezed {
        plane,
        report: SqueezeReport {
            dropped_fraction: if total > 0.0 { dropped / total } else { 0.0 },
            n_dropped_cells: n_dropped,
        },
        threshold,
        band_limit,
    })
}

/// Everything produced by transform, phase transform and squeeze.
#[derive(Debug, Clone)]
pub struct Analysis<P> {
    pub plane: P,
    pub derivative: P,
    pub phase: PhasePlane,
    pub squeezed: Squeezed,
    pub backend: Backend,
}

/// Phase transform and squeeze from a value/derivative pair.
pub fn synchrosqueeze<P: SourcePlane>(
    plane: P,
    derivative: P,
    backend: Backend,
    config: &SqueezeConfig,
) -> Result<Analysis<P>> {
    let threshold = config.threshold.resolve(&plane)?;
    let phase = phase_transform_of(&plane, &derivative, threshold)?;
    let squeezed = squeeze(&plane, &phase, config)?;
    Ok(Analysis {
        plane,
        derivative,
        phase,
        squeezed,
        backend,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{synthesize, ComponentSpec, SampledSignal};
    use crate::transform::{cwt_with_derivative, WaveletSpec};

    #[test]
    fn zero_plane_masks_everything() {
        let z = Array2::<Complex64>::zeros((4, 5));
        let p = phase_transform(&z, &z, 0.0).unwrap();
        assert_eq!(p.valid_count(), 0);
        assert!(p.omega.iter().all(|w| w.is_nan()));
    }

    #[test]
    fn mismatched_shapes_rejected() {
        let a = Array2::<Complex64>::zeros((4, 5));
        let b = Array2::<Complex64>::zeros((4, 6));
        assert!(matches!(phase_transform(&a, &b, 0.0), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn tie_goes_to_lower_bin() {
        let g = FrequencyGrid::arithmetic(1.0, 1.0, 4).unwrap();
        assert_eq!(g.locate(1.5), Some(0));
        assert_eq!(g.locate(1.5000001), Some(1));
        assert_eq!(g.locate(0.5), None);
        assert_eq!(g.locate(4.5), Some(3));
        assert_eq!(g.locate(4.6), None);
    }

    #[test]
    fn mad_of_constant_is_zero() {
        assert_eq!(median_absolute_deviation(&[2.0; 7]), 0.0);
        assert_eq!(median_absolute_deviation(&[1.0, 2.0, 3.0, 4.0, 100.0]), 1.0);
    }

    #[test]
    fn pure_tone_squeezes_into_one_bin() {
        let sig = synthesize(&[ComponentSpec::tone(1.0, 5.0)], 64.0, 8.0).unwrap();
        let w = WaveletSpec::default();
        let (v, d) = cwt_with_derivative(&sig, &w, 32, (1.0 / 20.0, 1.0)).unwrap();
        let a = synchrosqueeze(v, d, Backend::Cwt(w), &SqueezeConfig::default()).unwrap();
        let target = a.squeezed.plane.grid().clone();
        let bin = target.locate(5.0).unwrap();
        for ((m, _), z) in a.squeezed.plane.values().indexed_iter() {
            if m != bin {
                assert_eq!(z.norm(), 0.0);
            }
        }
        assert_eq!(a.squeezed.report.n_dropped_cells, 0);
        let _ = SampledSignal::zeros(8, 1.0);
    }
}
