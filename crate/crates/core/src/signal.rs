//! Sampled signals and the multicomponent AM-FM signal model
//! `f(t) = sum_k A_k(t) exp(2 pi i phi_k(t))`.
//!
//! Phases are measured in cycles, so `phi_k'` is an instantaneous frequency
//! in cycles per unit time. The analytic families here carry closed-form
//! first and second derivatives, which the test oracles rely on.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;
use std::f64::consts::TAU;

use crate::error::{invalid, Error, Result};

/// Uniformly sampled complex time series. Real signals carry a zero
/// imaginary part.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    samples: Vec<Complex64>,
    sample_rate: f64,
    start_time: f64,
}

impl SampledSignal {
    pub fn new(samples: Vec<Complex64>, sample_rate: f64, start_time: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(invalid("samples", "signal must contain at least one sample"));
        }
        if !(sample_rate > 0.0 && sample_rate.is_finite()) {
            return Err(invalid("sample_rate", format!("must be positive and finite, got {sample_rate}")));
        }
        if !start_time.is_finite() {
            return Err(invalid("start_time", "must be finite"));
        }
        Ok(Self {
            samples,
            sample_rate,
            start_time,
        })
    }

    pub fn from_real(samples: &[f64], sample_rate: f64, start_time: f64) -> Result<Self> {
        Self::new(
            samples.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            sample_rate,
            start_time,
        )
    }

    pub fn zeros(len: usize, sample_rate: f64) -> Result<Self> {
        Self::new(vec![Complex64::new(0.0, 0.0); len], sample_rate, 0.0)
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn start_time(&self) -> f64 {
        self.start_time
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.sample_rate
    }

    pub fn time(&self, n: usize) -> f64 {
        self.start_time + n as f64 / self.sample_rate
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|n| self.time(n)).collect()
    }

    /// `(len - 1) / sample_rate`.
    pub fn duration(&self) -> f64 {
        (self.len() - 1) as f64 / self.sample_rate
    }

    pub fn is_real(&self) -> bool {
        self.samples.iter().all(|z| z.im == 0.0)
    }

    /// Signal with the imaginary part discarded.
    pub fn real_part(&self) -> Self {
        Self {
            samples: self.samples.iter().map(|z| Complex64::new(z.re, 0.0)).collect(),
            ..self.clone()
        }
    }

    pub fn with_samples(&self, samples: Vec<Complex64>) -> Result<Self> {
        Self::new(samples, self.sample_rate, self.start_time)
    }

    /// Sample-wise sum; both signals must share the same grid.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.len() != other.len() || self.sample_rate != other.sample_rate || self.start_time != other.start_time {
            return Err(Error::GridMismatch("signals are sampled on different grids".into()));
        }
        let samples = self.samples.iter().zip(&other.samples).map(|(a, b)| a + b).collect();
        self.with_samples(samples)
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Number of samples for a grid of `duration` time units at `sample_rate`;
/// the grid is `t_n = n / sample_rate`, `0 <= n < len`.
pub fn grid_len(sample_rate: f64, duration: f64) -> Result<usize> {
    if !(sample_rate > 0.0 && sample_rate.is_finite()) {
        return Err(invalid("sample_rate", format!("must be positive and finite, got {sample_rate}")));
    }
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(invalid("duration", format!("must be positive and finite, got {duration}")));
    }
    let len = (duration * sample_rate).round() as usize;
    if len == 0 {
        return Err(invalid("duration", "grid would contain no samples"));
    }
    Ok(len)
}

/// Amplitude functions `A_k(t)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Amplitude {
    Constant(f64),
    /// `base + height * exp(-(t - center)^2 / (2 width^2))`.
    GaussianBump {
        base: f64,
        height: f64,
        center: f64,
        width: f64,
    },
    /// Samples on the grid `n / sample_rate`, linearly interpolated.
    Tabulated { sample_rate: f64, values: Vec<f64> },
}

impl Amplitude {
    pub fn value(&self, t: f64) -> f64 {
        match self {
            Amplitude::Constant(a) => *a,
            Amplitude::GaussianBump {
                base,
                height,
                center,
                width,
            } => {
                let u = (t - center) / width;
                base + height * (-0.5 * u * u).exp()
            }
            Amplitude::Tabulated { sample_rate, values } => interpolate(values, t * sample_rate),
        }
    }

    /// `A'(t)`, when a closed form exists.
    pub fn derivative(&self, t: f64) -> Option<f64> {
        match self {
            Amplitude::Constant(_) => Some(0.0),
            Amplitude::GaussianBump {
                height,
                center,
                width,
                ..
            } => {
                let u = (t - center) / width;
                Some(-height * u / width * (-0.5 * u * u).exp())
            }
            Amplitude::Tabulated { .. } => None,
        }
    }
}

/// Phase functions `phi_k(t)` in cycles.
#[derive(Debug, Clone, PartialEq)]
pub enum Phase {
    /// `freq * t + offset`.
    Tone { freq: f64, offset: f64 },
    /// `f0 * t + rate * t^2 / 2`.
    LinearChirp { f0: f64, rate: f64 },
    /// `linear * t + sum c t^p + sum b sin(w t) + offset`, defined for `t >= 0`.
    PolySine {
        linear: f64,
        powers: Vec<(f64, f64)>,
        sines: Vec<(f64, f64)>,
        offset: f64,
    },
    /// Phase samples on the grid `n / sample_rate`, linearly interpolated.
    /// Instantaneous frequencies must be supplied alongside to serve as
    /// ground truth.
    Tabulated {
        sample_rate: f64,
        phase: Vec<f64>,
        frequency: Option<Vec<f64>>,
    },
}

impl Phase {
    pub fn value(&self, t: f64) -> f64 {
        match self {
            Phase::Tone { freq, offset } => freq * t + offset,
            Phase::LinearChirp { f0, rate } => f0 * t + 0.5 * rate * t * t,
            Phase::PolySine {
                linear,
                powers,
                sines,
                offset,
            } => {
                let mut phi = linear * t + offset;
                for &(c, p) in powers {
                    phi += c * t.powf(p);
                }
                for &(b, w) in sines {
                    phi += b * (w * t).sin();
                }
                phi
            }
            Phase::Tabulated { sample_rate, phase, .. } => interpolate(phase, t * sample_rate),
        }
    }

    /// `phi'(t)`. Tabulated phases return their supplied frequency samples.
    pub fn frequency(&self, t: f64) -> Result<f64> {
        match self {
            Phase::Tone { freq, .. } => Ok(*freq),
            Phase::LinearChirp { f0, rate } => Ok(f0 + rate * t),
            Phase::PolySine {
                linear, powers, sines, ..
            } => {
                let mut d = *linear;
                for &(c, p) in powers {
                    d += c * p * t.powf(p - 1.0);
                }
                for &(b, w) in sines {
                    d += b * w * (w * t).cos();
                }
                Ok(d)
            }
            Phase::Tabulated {
                sample_rate,
                frequency: Some(freq),
                ..
            } => Ok(interpolate(freq, t * sample_rate)),
            Phase::Tabulated { frequency: None, .. } => Err(Error::NotAnalytic),
        }
    }

    /// `phi''(t)`, when a closed form exists.
    pub fn chirp_rate(&self, t: f64) -> Option<f64> {
        match self {
            Phase::Tone { .. } => Some(0.0),
            Phase::LinearChirp { rate, .. } => Some(*rate),
            Phase::PolySine { powers, sines, .. } => {
                let mut d2 = 0.0;
                for &(c, p) in powers {
                    if p != 1.0 {
                        d2 += c * p * (p - 1.0) * t.powf(p - 2.0);
                    }
                }
                for &(b, w) in sines {
                    d2 -= b * w * w * (w * t).sin();
                }
                Some(d2)
            }
            Phase::Tabulated { .. } => None,
        }
    }

    fn is_analytic(&self) -> bool {
        !matches!(self, Phase::Tabulated { .. })
    }
}

fn interpolate(values: &[f64], x: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    if x <= 0.0 {
        return values[0];
    }
    let i = x.floor() as usize;
    if i + 1 >= values.len() {
        return values[values.len() - 1];
    }
    let frac = x - i as f64;
    values[i] * (1.0 - frac) + values[i + 1] * frac
}

/// One component `A(t) exp(2 pi i phi(t))`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentSpec {
    pub amplitude: Amplitude,
    pub phase: Phase,
}

impl ComponentSpec {
    pub fn new(amplitude: Amplitude, phase: Phase) -> Self {
        Self { amplitude, phase }
    }

    pub fn tone(amplitude: f64, freq: f64) -> Self {
        Self::new(Amplitude::Constant(amplitude), Phase::Tone { freq, offset: 0.0 })
    }

    pub fn linear_chirp(amplitude: f64, f0: f64, rate: f64) -> Self {
        Self::new(Amplitude::Constant(amplitude), Phase::LinearChirp { f0, rate })
    }

    /// Unit amplitude with phase `0.1 t^2.6 + 3 sin(2t) + 10 t`; its real
    /// part is the nonlinear chirp used by the `fig1` preset.
    pub fn fig1() -> Self {
        Self::new(
            Amplitude::Constant(1.0),
            Phase::PolySine {
                linear: 10.0,
                powers: vec![(0.1, 2.6)],
                sines: vec![(3.0, 2.0)],
                offset: 0.0,
            },
        )
    }

    pub fn value(&self, t: f64) -> Complex64 {
        let a = self.amplitude.value(t);
        Complex64::from_polar(a, TAU * self.phase.value(t))
    }

    pub fn frequency(&self, t: f64) -> Result<f64> {
        self.phase.frequency(t)
    }
}

/// Samples `sum_k A_k(t_n) exp(2 pi i phi_k(t_n))` on `t_n = n / sample_rate`.
pub fn synthesize(specs: &[ComponentSpec], sample_rate: f64, duration: f64) -> Result<SampledSignal> {
    if specs.is_empty() {
        return Err(Error::NoComponents);
    }
    let len = grid_len(sample_rate, duration)?;
    let nyquist = 0.5 * sample_rate;
    for spec in specs {
        if spec.phase.is_analytic() || matches!(spec.phase, Phase::Tabulated { frequency: Some(_), .. }) {
            let mut worst = (0.0f64, 0.0f64);
            for n in 0..len {
                let t = n as f64 / sample_rate;
                let f = spec.frequency(t)?.abs();
                if f > worst.0 {
                    worst = (f, t);
                }
            }
            if worst.0 >= nyquist {
                return Err(Error::Nyquist {
                    rate: sample_rate,
                    max_if: worst.0,
                    time: worst.1,
                });
            }
        }
    }
    let samples = (0..len)
        .map(|n| {
            let t = n as f64 / sample_rate;
            specs.iter().map(|s| s.value(t)).sum()
        })
        .collect();
    SampledSignal::new(samples, sample_rate, 0.0)
}

/// `phi'(t_n)` from the closed form (or supplied samples for tabulated phases).
pub fn ground_truth_if(spec: &ComponentSpec, times: &[f64]) -> Result<Vec<f64>> {
    times.iter().map(|&t| spec.frequency(t)).collect()
}

/// Location where two instantaneous-frequency curves touch or cross.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Crossing {
    pub time: f64,
    /// Indices into the caller's spec list.
    pub lower: usize,
    pub upper: usize,
}

/// Measured slow-variation and separation parameters of a component set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassReport {
    /// Smallest epsilon with `|A'| <= eps phi'` and `|phi''| <= eps phi'` at every sample.
    pub epsilon_measured: f64,
    /// Smallest `(phi_k' - phi_{k-1}') / (phi_k' + phi_{k-1}')`; `None` for one component.
    pub d_measured: Option<f64>,
    /// First place where adjacent IF curves touch or cross.
    pub crossing: Option<Crossing>,
    /// First sample where an amplitude or IF is not strictly positive.
    pub nonpositive_at: Option<f64>,
    pub epsilon_requested: f64,
    pub d_requested: f64,
    pub member: bool,
}

impl ClassReport {
    /// Comparisons allow a relative slack of 1e-12 so that parameters
    /// computed in floating point match the values they were built from.
    pub fn is_member(&self, epsilon: f64, d: f64) -> bool {
        const SLACK: f64 = 1e-12;
        self.crossing.is_none()
            && self.nonpositive_at.is_none()
            && self.epsilon_measured <= epsilon * (1.0 + SLACK)
            && self.d_measured.is_none_or(|dm| dm >= d * (1.0 - SLACK))
    }
}

/// Checks membership in the slowly-varying, well-separated signal class on
/// the sample grid `t_n = n / sample_rate`, `n < round(duration * rate)`.
pub fn validate_class(
    specs: &[ComponentSpec],
    sample_rate: f64,
    duration: f64,
    epsilon: f64,
    d: f64,
) -> Result<ClassReport> {
    if specs.is_empty() {
        return Err(Error::NoComponents);
    }
    let len = grid_len(sample_rate, duration)?;
    let times: Vec<f64> = (0..len).map(|n| n as f64 / sample_rate).collect();

    let mut freqs = Vec::with_capacity(specs.len());
    for spec in specs {
        freqs.push(ground_truth_if(spec, &times)?);
    }

    let mut order: Vec<usize> = (0..specs.len()).collect();
    let min_of = |v: &Vec<f64>| v.iter().copied().fold(f64::INFINITY, f64::min);
    order.sort_by(|&a, &b| min_of(&freqs[a]).total_cmp(&min_of(&freqs[b])));

    let mut epsilon_measured = 0.0f64;
    let mut nonpositive_at = None;
    for (spec, freq) in specs.iter().zip(&freqs) {
        for (n, &t) in times.iter().enumerate() {
            let a = spec.amplitude.value(t);
            let f = freq[n];
            if (a <= 0.0 || f <= 0.0) && nonpositive_at.is_none() {
                nonpositive_at = Some(t);
            }
            let da = spec.amplitude.derivative(t).ok_or(Error::NotAnalytic)?;
            let d2 = spec.phase.chirp_rate(t).ok_or(Error::NotAnalytic)?;
            let ratio = da.abs().max(d2.abs()) / f.abs();
            epsilon_measured = epsilon_measured.max(ratio);
        }
    }

    let mut d_measured = None;
    let mut crossing = None;
    for pair in order.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        for (n, &t) in times.iter().enumerate() {
            let (fl, fh) = (freqs[lo][n], freqs[hi][n]);
            if fh <= fl && crossing.is_none() {
                crossing = Some(Crossing {
                    time: t,
                    lower: lo,
                    upper: hi,
                });
            }
            let sep = (fh - fl) / (fh + fl);
            d_measured = Some(d_measured.map_or(sep, |m: f64| m.min(sep)));
        }
    }

    let mut report = ClassReport {
        epsilon_measured,
        d_measured,
        crossing,
        nonpositive_at,
        epsilon_requested: epsilon,
        d_requested: d,
        member: false,
    };
    report.member = report.is_member(epsilon, d);
    Ok(report)
}

/// Adds i.i.d. Gaussian noise of variance `power`. Real signals get real
/// noise; complex signals get circular complex noise with total variance
/// `power`. A fixed seed reproduces the output bit for bit.
pub fn add_white_noise(signal: &SampledSignal, power: f64, seed: u64) -> Result<SampledSignal> {
    if !(power >= 0.0 && power.is_finite()) {
        return Err(invalid("power", format!("noise power must be non-negative, got {power}")));
    }
    if power == 0.0 {
        return Ok(signal.clone());
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let real = signal.is_real();
    let std = if real { power.sqrt() } else { (0.5 * power).sqrt() };
    let normal = Normal::new(0.0, std).map_err(|e| invalid("power", e.to_string()))?;
    let samples = signal
        .samples()
        .iter()
        .map(|&z| {
            let re = normal.sample(&mut rng);
            let im = if real { 0.0 } else { normal.sample(&mut rng) };
            z + Complex64::new(re, im)
        })
        .collect();
    signal.with_samples(samples)
}

/// Discrete unit-area impulses: zero except at the sample nearest each event,
/// which holds `weight * sample_rate`.
pub fn impulse_train(events: &[f64], weights: &[f64], sample_rate: f64, duration: f64) -> Result<SampledSignal> {
    if events.len() != weights.len() {
        return Err(invalid("weights", "one weight per event is required"));
    }
    let len = grid_len(sample_rate, duration)?;
    for pair in events.windows(2) {
        if pair[1] <= pair[0] {
            return Err(invalid("event_times", "event times must be strictly increasing"));
        }
    }
    let mut samples = vec![Complex64::new(0.0, 0.0); len];
    for (&t, &w) in events.iter().zip(weights) {
        if !(0.0..=duration).contains(&t) {
            return Err(Error::EventOutOfRange { time: t, duration });
        }
        let n = ((t * sample_rate).round() as usize).min(len - 1);
        samples[n] += Complex64::new(w * sample_rate, 0.0);
    }
    SampledSignal::new(samples, sample_rate, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_tone_samples() {
        let s = synthesize(&[ComponentSpec::tone(1.0, 5.0)], 100.0, 2.0).unwrap();
        assert_eq!(s.len(), 200);
        for (n, z) in s.samples().iter().enumerate() {
            let t = n as f64 / 100.0;
            let expect = Complex64::from_polar(1.0, TAU * 5.0 * t);
            assert!((z - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn empty_specs_rejected() {
        assert!(matches!(synthesize(&[], 100.0, 2.0), Err(Error::NoComponents)));
    }

    #[test]
    fn nyquist_violation_reports_max_if() {
        let err = synthesize(&[ComponentSpec::tone(1.0, 60.0)], 100.0, 1.0).unwrap_err();
        match err {
            Error::Nyquist { max_if, .. } => assert_eq!(max_if, 60.0),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn fig1_frequency_at_zero_is_sixteen() {
        let spec = ComponentSpec::fig1();
        assert!((spec.frequency(0.0).unwrap() - 16.0).abs() < 1e-12);
        let t = 3.7f64;
        let expect = 0.26 * t.powf(1.6) + 6.0 * (2.0 * t).cos() + 10.0;
        assert!((spec.frequency(t).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn tabulated_phase_without_if_is_not_analytic() {
        let spec = ComponentSpec::new(
            Amplitude::Constant(1.0),
            Phase::Tabulated {
                sample_rate: 10.0,
                phase: vec![0.0, 0.5, 1.0],
                frequency: None,
            },
        );
        assert!(matches!(ground_truth_if(&spec, &[0.0]), Err(Error::NotAnalytic)));
    }

    #[test]
    fn two_tone_separation() {
        let specs = [ComponentSpec::tone(1.0, 12.0), ComponentSpec::tone(1.0, 5.0)];
        let r = validate_class(&specs, 100.0, 2.0, 1e-3, 0.3).unwrap();
        assert!((r.d_measured.unwrap() - 7.0 / 17.0).abs() < 1e-15);
        assert_eq!(r.epsilon_measured, 0.0);
        assert!(r.member);
        assert!(!r.is_member(1e-3, 0.5));
        let single = validate_class(&specs[..1], 100.0, 2.0, 0.0, 0.9).unwrap();
        assert_eq!(single.d_measured, None);
        assert!(single.member);
    }

    #[test]
    fn crossing_curves_are_not_members() {
        let specs = [
            ComponentSpec::linear_chirp(1.0, 5.0, 2.0),
            ComponentSpec::tone(1.0, 8.0),
        ];
        let r = validate_class(&specs, 50.0, 4.0, 10.0, 0.0).unwrap();
        let c = r.crossing.expect("curves cross at t = 1.5");
        assert!((c.time - 1.5).abs() < 1e-9);
        assert!(!r.member);
    }

    #[test]
    fn zero_noise_is_identity_and_seed_is_deterministic() {
        let s = synthesize(&[ComponentSpec::tone(1.0, 3.0)], 64.0, 1.0).unwrap();
        assert_eq!(add_white_noise(&s, 0.0, 1).unwrap(), s);
        let a = add_white_noise(&s, 0.5, 42).unwrap();
        let b = add_white_noise(&s, 0.5, 42).unwrap();
        assert_eq!(a, b);
        assert!(add_white_noise(&s, -1.0, 1).is_err());
    }

    #[test]
    fn impulse_train_single_event() {
        let s = impulse_train(&[0.5], &[1.0], 100.0, 1.0).unwrap();
        for (n, z) in s.samples().iter().enumerate() {
            let expect = if n == 50 { 100.0 } else { 0.0 };
            assert_eq!(z.re, expect);
        }
        let empty = impulse_train(&[], &[], 100.0, 1.0).unwrap();
        assert!(empty.samples().iter().all(|z| z.norm() == 0.0));
        assert!(matches!(
            impulse_train(&[1.5], &[1.0], 100.0, 1.0),
            Err(Error::EventOutOfRange { .. })
        ));
    }
}
