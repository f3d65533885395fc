//! Component recovery by integrating a squeezed plane over a band around
//! each ridge.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::ridge::{Ridge, RidgeSet};
use crate::signal::SampledSignal;
use crate::transform::{Backend, TimeFrequencyPlane};

/// Band half-width around a ridge. CWT bands are measured in octaves
/// (`|log2(eta / f)|`), STFT bands in frequency units (`|eta - f|`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "kebab-case")]
pub enum BandPolicy {
    Fixed { half_width: f64 },
    /// Half the distance to the nearest other ridge at each column, capped.
    /// A missing cap means 1 octave for the CWT and `1.5 / half_width` (about
    /// the window's spectral main lobe) for the STFT.
    Adaptive { cap: Option<f64> },
}

impl Default for BandPolicy {
    fn default() -> Self {
        BandPolicy::Adaptive { cap: None }
    }
}

impl BandPolicy {
    pub fn validate(&self) -> Result<()> {
        let w = match *self {
            BandPolicy::Fixed { half_width } => Some(half_width),
            BandPolicy::Adaptive { cap } => cap,
        };
        match w {
            Some(w) if !(w > 0.0 && w.is_finite()) => {
                Err(invalid("band", format!("half-width must be positive, got {w}")))
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            BandPolicy::Fixed { .. } => "fixed",
            BandPolicy::Adaptive { .. } => "adaptive",
        }
    }
}

fn default_cap(backend: &Backend) -> f64 {
    match backend {
        Backend::Cwt(_) => 1.0,
        Backend::Stft(w) => 1.5 / w.half_width,
    }
}

/// Distance between frequencies in the band's units.
fn band_distance(backend: &Backend, a: f64, b: f64) -> f64 {
    match backend {
        Backend::Cwt(_) => (a / b).log2().abs(),
        Backend::Stft(_) => (a - b).abs(),
    }
}

/// One recovered component.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub samples: Vec<Complex64>,
    /// Band half-width used at each column (0 where the ridge is absent).
    pub band: Vec<f64>,
    /// Columns where the ridge was absent; the component is zero there.
    pub missing: Vec<bool>,
    /// Columns where this band overlaps another component's band.
    pub overlap: Vec<bool>,
}

impl Component {
    pub fn overlap_count(&self) -> usize {
        self.overlap.iter().filter(|&&o| o).count()
    }

    pub fn missing_count(&self) -> usize {
        self.missing.iter().filter(|&&o| o).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentSet {
    pub components: Vec<Component>,
    pub policy: BandPolicy,
    pub backend: Backend,
    pub times: Vec<f64>,
}

impl ComponentSet {
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }
}

/// `(1 / C) sum_{|eta_m - f(t)| < w(t)} S(m, t) d_eta_m` for each column,
/// where `C` is the backend's inversion constant.
pub fn reconstruct_component(
    squeezed: &TimeFrequencyPlane,
    ridge: &Ridge,
    band: &[f64],
    backend: &Backend,
) -> Result<Component> {
    let cols = squeezed.times().len();
    if band.len() != cols {
        return Err(Error::GridMismatch(format!("band has {} columns, plane has {cols}", band.len())));
    }
    if ridge.end() > cols {
        return Err(Error::GridMismatch(format!(
            "ridge ends at column {} but the plane has {cols}",
            ridge.end()
        )));
    }
    if ridge.bins.iter().any(|&b| b >= squeezed.freqs().len()) {
        return Err(Error::GridMismatch("ridge refers to a bin outside the plane".into()));
    }
    let c = backend.inversion_constant();
    let freqs = squeezed.freqs();
    let widths = squeezed.grid().widths();
    let values = squeezed.values();
    let mut samples = vec![Complex64::new(0.0, 0.0); cols];
    let mut missing = vec![true; cols];
    for n in ridge.start..ridge.end() {
        let f = ridge.freqs[n - ridge.start];
        missing[n] = false;
        let w = band[n];
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, &eta) in freqs.iter().enumerate() {
            if band_distance(backend, eta, f) < w {
                acc += values[[m, n]] * widths[m];
            }
        }
        samples[n] = acc / c;
    }
    let band = band.iter().zip(&missing).map(|(&w, &miss)| if miss { 0.0 } else { w }).collect();
    Ok(Component {
        samples,
        band,
        missing,
        overlap: vec![false; cols],
    })
}

fn band_widths(set: &RidgeSet, policy: &BandPolicy, backend: &Backend) -> Vec<Vec<f64>> {
    let cols = set.times.len();
    set.ridges
        .iter()
        .enumerate()
        .map(|(k, r)| {
            (0..cols)
                .map(|n| {
                    let Some(f) = r.freq_at(n) else { return 0.0 };
                    match *policy {
                        BandPolicy::Fixed { half_width } => half_width,
                        BandPolicy::Adaptive { cap } => {
                            let cap = cap.unwrap_or_else(|| default_cap(backend));
                            set.ridges
                                .iter()
                                .enumerate()
                                .filter(|&(j, _)| j != k)
                                .filter_map(|(_, o)| o.freq_at(n))
                                .map(|g| 0.5 * band_distance(backend, f, g))
                                .fold(cap, f64::min)
                        }
                    }
                })
                .collect()
        })
        .collect()
}

/// Reconstructs every ridge, flagging columns where two bands overlap.
pub fn reconstruct_all(
    squeezed: &TimeFrequencyPlane,
    ridges: &RidgeSet,
    policy: &BandPolicy,
    backend: &Backend,
) -> Result<ComponentSet> {
    policy.validate()?;
    if ridges.times.len() != squeezed.times().len() {
        return Err(Error::GridMismatch("ridge set and plane have different time grids".into()));
    }
    let bands = band_widths(ridges, policy, backend);
    let mut components = ridges
        .ridges
        .iter()
        .zip(&bands)
        .map(|(r, b)| reconstruct_component(squeezed, r, b, backend))
        .collect::<Result<Vec<_>>>()?;
    let cols = ridges.times.len();
    for n in 0..cols {
        for i in 0..ridges.len() {
            for j in (i + 1)..ridges.len() {
                let (Some(fi), Some(fj)) = (ridges.ridges[i].freq_at(n), ridges.ridges[j].freq_at(n)) else {
                    continue;
                };
                if band_distance(backend, fi, fj) < bands[i][n] + bands[j][n] - 1e-12 {
                    components[i].overlap[n] = true;
                    components[j].overlap[n] = true;
                }
            }
        }
    }
    Ok(ComponentSet {
        components,
        policy: *policy,
        backend: backend.clone(),
        times: ridges.times.clone(),
    })
}

/// `2 Re(component)`: the real-signal convention, since real inputs are
/// analysed through their positive-frequency half.
pub fn reconstruct_real(component: &[Complex64]) -> Vec<f64> {
    component.iter().map(|z| 2.0 * z.re).collect()
}

/// `(1 / C) sum_m S(m, t) d_eta_m` over the whole plane: the signal as seen
/// by the squeeze, for bookkeeping against the input.
pub fn invert_full(squeezed: &TimeFrequencyPlane, backend: &Backend) -> Vec<Complex64> {
    let c = backend.inversion_constant();
    let widths = squeezed.grid().widths();
    squeezed
        .values()
        .columns()
        .into_iter()
        .map(|col| col.iter().zip(&widths).map(|(v, w)| v * *w).sum::<Complex64>() / c)
        .collect()
}

/// Component as a signal on the original grid; real inputs give `2 Re`.
pub fn component_signal(component: &Component, like: &SampledSignal) -> Result<SampledSignal> {
    let samples = if like.is_real() {
        reconstruct_real(&component.samples)
            .into_iter()
            .map(|x| Complex64::new(x, 0.0))
            .collect()
    } else {
        component.samples.clone()
    };
    like.with_samples(samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_part_doubles() {
        let half = [Complex64::new(0.5, 0.3), Complex64::new(-0.25, 1.0)];
        assert_eq!(reconstruct_real(&half), vec![1.0, -0.5]);
    }

    #[test]
    fn invalid_band_rejected() {
        assert!(BandPolicy::Fixed { half_width: 0.0 }.validate().is_err());
        assert!(BandPolicy::Adaptive { cap: Some(-1.0) }.validate().is_err());
        assert!(BandPolicy::default().validate().is_ok());
    }
}
