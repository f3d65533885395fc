//! Continuous wavelet transform and modified STFT.
//!
//! Both transforms are evaluated as filter banks in the frequency domain:
//! the signal is reflect-padded to the next power of two, transformed once,
//! and each row of the plane is the inverse FFT of the spectrum times that
//! row's filter (`sqrt(a) psi_hat(a xi)` for the CWT, `G_hat(z - xi)` for the
//! modified STFT). Time derivatives multiply by `2 pi i xi` before the
//! inverse transform, which is exact for the band-limited interpolant of the
//! samples.

mod plane;
mod wavelet;
mod window;

pub use plane::{Backend, Coi, FrequencyGrid, GridKind, TimeFrequencyPlane, TimeScalePlane};
pub use wavelet::{admissibility_constant, WaveletFamily, WaveletSpec, BUMP_COI_SPAN};
pub use window::{window_energy, WindowFamily, WindowSpec};

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::{LN_2, TAU};
use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::signal::SampledSignal;
use window::WindowSpectrum;

/// FFT of the reflect-padded signal plus what is needed to map rows back.
struct PaddedSpectrum {
    spectrum: Vec<Complex64>,
    bin_freqs: Vec<f64>,
    offset: usize,
    len: usize,
    inverse: Arc<dyn Fft<f64>>,
}

impl PaddedSpectrum {
    /// Real inputs keep only their positive-frequency half (DC halved), so
    /// every transform sees the analytic part and a real cosine of amplitude
    /// `A` appears with amplitude `A / 2`.
    fn new(signal: &SampledSignal) -> Self {
        let len = signal.len();
        let npad = len.next_power_of_two();
        let offset = (npad - len) / 2;
        let x = signal.samples();
        // Whole-sample symmetric reflection; the pad is shorter than the signal.
        let reflect = |i: isize| -> Complex64 {
            let n = len as isize;
            let j = if i < 0 {
                -i
            } else if i >= n {
                2 * (n - 1) - i
            } else {
                i
            };
            x[j as usize]
        };
        let mut buf: Vec<Complex64> = (0..npad).map(|i| reflect(i as isize - offset as isize)).collect();
        let mut planner = FftPlanner::new();
        planner.plan_fft_forward(npad).process(&mut buf);
        let inverse = planner.plan_fft_inverse(npad);

        let rate = signal.sample_rate();
        let bin_freqs: Vec<f64> = (0..npad)
            .map(|k| {
                let k = if k < npad / 2 { k as f64 } else { k as f64 - npad as f64 };
                k * rate / npad as f64
            })
            .collect();
        if signal.is_real() {
            for (k, v) in buf.iter_mut().enumerate() {
                if k == 0 {
                    *v *= 0.5;
                } else if bin_freqs[k] <= 0.0 || k == npad / 2 {
                    *v = Complex64::new(0.0, 0.0);
                }
            }
        }
        Self {
            spectrum: buf,
            bin_freqs,
            offset,
            len,
            inverse,
        }
    }

    fn padded_len(&self) -> usize {
        self.spectrum.len()
    }

    /// One plane row for `filter(xi)`; `derivative` selects `d/dt`.
    fn row<F: Fn(f64) -> f64>(&self, filter: F, derivative: bool, out: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        let npad = self.padded_len();
        scratch.clear();
        scratch.extend(self.spectrum.iter().zip(&self.bin_freqs).map(|(&v, &xi)| {
            let g = filter(xi);
            if g == 0.0 || v == Complex64::new(0.0, 0.0) {
                Complex64::new(0.0, 0.0)
            } else if derivative {
                v * Complex64::new(0.0, TAU * xi * g)
            } else {
                v * g
            }
        }));
        self.inverse.process(scratch);
        let norm = 1.0 / npad as f64;
        for (o, v) in out.iter_mut().zip(&scratch[self.offset..self.offset + self.len]) {
            *o = v * norm;
        }
    }
}

/// Geometric scale grid `a_j = a_min 2^(j / n_voices)`, with
/// `ceil(n_voices log2(a_max / a_min))` scales.
pub fn scale_grid(n_voices: usize, a_min: f64, a_max: f64) -> Result<Vec<f64>> {
    if n_voices < 4 {
        return Err(invalid("n_voices", format!("must be at least 4, got {n_voices}")));
    }
    if !(a_min > 0.0 && a_min.is_finite()) {
        return Err(invalid("scale_range", format!("a_min must be positive, got {a_min}")));
    }
    if !(a_max > a_min && a_max.is_finite()) {
        return Err(invalid("scale_range", format!("a_max must exceed a_min, got [{a_min}, {a_max}]")));
    }
    let count = (n_voices as f64 * (a_max / a_min).log2() - 1e-9).ceil().max(1.0) as usize;
    Ok((0..count)
        .map(|j| a_min * (j as f64 * LN_2 / n_voices as f64).exp())
        .collect())
}

fn check_cwt_inputs(signal: &SampledSignal, wavelet: &WaveletSpec, scales: &[f64]) -> Result<()> {
    wavelet.validate()?;
    if signal.len() < 8 {
        return Err(invalid("signal", format!("needs at least 8 samples, got {}", signal.len())));
    }
    let rate = signal.sample_rate();
    let nyquist = 0.5 * rate;
    let a_min = scales[0];
    let band_edge = wavelet.support().1 / a_min;
    if band_edge > nyquist {
        return Err(Error::ScaleTooSmall {
            scale: a_min,
            band_edge,
            nyquist,
        });
    }
    let padded = signal.len().next_power_of_two() as f64 / rate;
    let a_max = *scales.last().expect("nonempty scales");
    let span = wavelet.time_radius(a_max);
    if span > padded {
        return Err(Error::ScaleTooLarge {
            scale: a_max,
            span,
            padded,
        });
    }
    Ok(())
}

fn cwt_planes(
    signal: &SampledSignal,
    wavelet: &WaveletSpec,
    n_voices: usize,
    scale_range: (f64, f64),
    want_value: bool,
    want_derivative: bool,
) -> Result<(Option<TimeScalePlane>, Option<TimeScalePlane>)> {
    let scales = scale_grid(n_voices, scale_range.0, scale_range.1)?;
    check_cwt_inputs(signal, wavelet, &scales)?;
    let padded = PaddedSpectrum::new(signal);
    let n = signal.len();
    let times = signal.times();
    let freqs: Vec<f64> = scales.iter().map(|a| 1.0 / a).collect();
    let coi = wavelet.coi().mask(&freqs, &times);

    let mut values = want_value.then(|| Array2::zeros((scales.len(), n)));
    let mut derivs = want_derivative.then(|| Array2::zeros((scales.len(), n)));
    let mut scratch = Vec::with_capacity(padded.padded_len());
    let mut row = vec![Complex64::new(0.0, 0.0); n];
    for (j, &a) in scales.iter().enumerate() {
        let root = a.sqrt();
        let filter = |xi: f64| root * wavelet.spectrum(a * xi);
        if let Some(v) = values.as_mut() {
            padded.row(filter, false, &mut row, &mut scratch);
            v.row_mut(j).iter_mut().zip(&row).for_each(|(o, r)| *o = *r);
        }
        if let Some(d) = derivs.as_mut() {
            padded.row(filter, true, &mut row, &mut scratch);
            d.row_mut(j).iter_mut().zip(&row).for_each(|(o, r)| *o = *r);
        }
    }
    let make = |values: Array2<Complex64>| TimeScalePlane {
        values,
        scales: scales.clone(),
        times: times.clone(),
        coi: coi.clone(),
        wavelet: *wavelet,
        n_voices,
    };
    Ok((values.map(make), derivs.map(make)))
}

/// `W f(a, t) = a^(-1/2) int f(u) conj(psi((u - t) / a)) du` on a geometric scale grid.
pub fn cwt(
    signal: &SampledSignal,
    wavelet: &WaveletSpec,
    n_voices: usize,
    scale_range: (f64, f64),
) -> Result<TimeScalePlane> {
    let (v, _) = cwt_planes(signal, wavelet, n_voices, scale_range, true, false)?;
    Ok(v.expect("value plane requested"))
}

/// `d/dt W f(a, t)`, by the differentiation theorem.
pub fn cwt_time_derivative(
    signal: &SampledSignal,
    wavelet: &WaveletSpec,
    n_voices: usize,
    scale_range: (f64, f64),
) -> Result<TimeScalePlane> {
    let (_, d) = cwt_planes(signal, wavelet, n_voices, scale_range, false, true)?;
    Ok(d.expect("derivative plane requested"))
}

/// CWT and its time derivative from a single forward FFT.
pub fn cwt_with_derivative(
    signal: &SampledSignal,
    wavelet: &WaveletSpec,
    n_voices: usize,
    scale_range: (f64, f64),
) -> Result<(TimeScalePlane, TimeScalePlane)> {
    let (v, d) = cwt_planes(signal, wavelet, n_voices, scale_range, true, true)?;
    Ok((v.expect("value plane"), d.expect("derivative plane")))
}

/// Arithmetic analysis grid for the modified STFT: `n_freqs` bins spanning
/// `[z_min, z_max]` inclusive.
pub fn stft_grid(z_min: f64, z_max: f64, n_freqs: usize) -> Result<FrequencyGrid> {
    if n_freqs < 8 {
        return Err(invalid("n_freqs", format!("must be at least 8, got {n_freqs}")));
    }
    if !(z_min > 0.0) {
        return Err(invalid("freq_range", format!("z_min must be positive, got {z_min}")));
    }
    if !(z_max > z_min && z_max.is_finite()) {
        return Err(invalid("freq_range", format!("z_max must exceed z_min, got [{z_min}, {z_max}]")));
    }
    let step = (z_max - z_min) / (n_freqs - 1) as f64;
    FrequencyGrid::arithmetic(z_min, step, n_freqs)
}

/// Default grid: `n / 2` bins at multiples of `rate / n` up to Nyquist.
pub fn default_stft_grid(signal: &SampledSignal) -> Result<FrequencyGrid> {
    let n_freqs = (signal.len() / 2).max(8);
    let step = 0.5 * signal.sample_rate() / n_freqs as f64;
    FrequencyGrid::arithmetic(step, step, n_freqs)
}

fn stft_planes(
    signal: &SampledSignal,
    window: &WindowSpec,
    grid: &FrequencyGrid,
    want_value: bool,
    want_derivative: bool,
) -> Result<(Option<TimeFrequencyPlane>, Option<TimeFrequencyPlane>)> {
    window.validate()?;
    if signal.len() < 8 {
        return Err(invalid("signal", format!("needs at least 8 samples, got {}", signal.len())));
    }
    let duration = signal.duration();
    if window.half_width > 0.5 * duration {
        return Err(Error::WindowTooWide {
            half_width: window.half_width,
            duration,
        });
    }
    let nyquist = 0.5 * signal.sample_rate();
    let z_max = *grid.centers().last().expect("nonempty grid");
    if z_max > nyquist * (1.0 + 1e-12) {
        return Err(invalid("freq_range", format!("z_max {z_max} exceeds the Nyquist frequency {nyquist}")));
    }

    let padded = PaddedSpectrum::new(signal);
    let n = signal.len();
    let times = signal.times();
    let spectrum = WindowSpectrum::build(window, z_max + nyquist);
    let coi_rule = Coi::Window {
        half_width: window.half_width,
    };

    let mut values = want_value.then(|| Array2::zeros((grid.len(), n)));
    let mut derivs = want_derivative.then(|| Array2::zeros((grid.len(), n)));
    let mut scratch = Vec::with_capacity(padded.padded_len());
    let mut row = vec![Complex64::new(0.0, 0.0); n];
    for (m, &z) in grid.centers().iter().enumerate() {
        let filter = |xi: f64| spectrum.eval(z - xi);
        if let Some(v) = values.as_mut() {
            padded.row(filter, false, &mut row, &mut scratch);
            v.row_mut(m).iter_mut().zip(&row).for_each(|(o, r)| *o = *r);
        }
        if let Some(d) = derivs.as_mut() {
            // 2 pi i z V_G - V_G' has the filter 2 pi i xi G_hat(z - xi).
            padded.row(filter, true, &mut row, &mut scratch);
            d.row_mut(m).iter_mut().zip(&row).for_each(|(o, r)| *o = *r);
        }
    }
    let make = |values| TimeFrequencyPlane::new(values, grid.clone(), times.clone(), coi_rule);
    Ok((values.map(make).transpose()?, derivs.map(make).transpose()?))
}

/// `V_G f(t, z) = int f(u) G(u - t) exp(-2 pi i z (u - t)) du`.
pub fn mstft(signal: &SampledSignal, window: &WindowSpec, grid: &FrequencyGrid) -> Result<TimeFrequencyPlane> {
    let (v, _) = stft_planes(signal, window, grid, true, false)?;
    Ok(v.expect("value plane requested"))
}

/// `d/dt V_G f(t, z) = 2 pi i z V_G f - V_G' f`.
pub fn mstft_time_derivative(
    signal: &SampledSignal,
    window: &WindowSpec,
    grid: &FrequencyGrid,
) -> Result<TimeFrequencyPlane> {
    let (_, d) = stft_planes(signal, window, grid, false, true)?;
    Ok(d.expect("derivative plane requested"))
}

pub fn mstft_with_derivative(
    signal: &SampledSignal,
    window: &WindowSpec,
    grid: &FrequencyGrid,
) -> Result<(TimeFrequencyPlane, TimeFrequencyPlane)> {
    let (v, d) = stft_planes(signal, window, grid, true, true)?;
    Ok((v.expect("value plane"), d.expect("derivative plane")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{synthesize, ComponentSpec};

    #[test]
    fn scale_count_rounds_up() {
        let s = scale_grid(32, 0.01, 1.0).unwrap();
        assert_eq!(s.len(), (32.0 * 100f64.log2()).ceil() as usize);
        let ratio = s[1] / s[0];
        assert!(s.windows(2).all(|w| (w[1] / w[0] - ratio).abs() < 1e-12));
        assert!(scale_grid(3, 0.1, 1.0).is_err());
        assert!(scale_grid(8, 0.0, 1.0).is_err());
    }

    #[test]
    fn pure_tone_cwt_closed_form() {
        let sig = synthesize(&[ComponentSpec::tone(1.0, 5.0)], 128.0, 8.0).unwrap();
        let w = WaveletSpec::default();
        let plane = cwt(&sig, &w, 16, (1.0 / 40.0, 1.0)).unwrap();
        for (j, &a) in plane.scales().iter().enumerate() {
            let expect = a.sqrt() * w.spectrum(a * 5.0);
            for n in [100, 500, 900] {
                let v = plane.values()[[j, n]];
                let t = sig.time(n);
                let e = Complex64::from_polar(expect, TAU * 5.0 * t);
                assert!((v - e).norm() < 1e-10, "scale {a} time {t}");
            }
        }
    }

    #[test]
    fn zero_signal_gives_zero_planes() {
        let sig = SampledSignal::zeros(256, 32.0).unwrap();
        let (v, d) = cwt_with_derivative(&sig, &WaveletSpec::default(), 8, (0.1, 1.0)).unwrap();
        assert!(v.values().iter().chain(d.values().iter()).all(|z| z.norm() == 0.0));
        let grid = default_stft_grid(&sig).unwrap();
        let (v, d) = mstft_with_derivative(&sig, &WindowSpec::gaussian(0.5).unwrap(), &grid).unwrap();
        assert!(v.values().iter().chain(d.values().iter()).all(|z| z.norm() == 0.0));
    }

    #[test]
    fn oversized_scale_is_rejected_by_name() {
        let sig = SampledSignal::zeros(256, 32.0).unwrap();
        match cwt(&sig, &WaveletSpec::default(), 8, (0.1, 4.0)) {
            Err(Error::ScaleTooLarge { scale, .. }) => assert!(scale > 2.0),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            cwt(&sig, &WaveletSpec::default(), 8, (0.01, 1.0)),
            Err(Error::ScaleTooSmall { .. })
        ));
    }

    #[test]
    fn wide_window_is_rejected() {
        let sig = SampledSignal::zeros(64, 32.0).unwrap();
        let grid = default_stft_grid(&sig).unwrap();
        assert!(matches!(
            mstft(&sig, &WindowSpec::gaussian(1.5).unwrap(), &grid),
            Err(Error::WindowTooWide { .. })
        ));
    }
}
