use serde::{Deserialize, Serialize};

use super::plane::Coi;
use crate::error::{invalid, Result};
use crate::quadrature;

/// Half-length of the bump wavelet in units of `scale / delta`; beyond it the
/// time envelope stays below about 1% of its peak.
pub const BUMP_COI_SPAN: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WaveletFamily {
    /// `psi_hat(z) = e * exp(-1 / (1 - ((z - 1) / delta)^2))` on `[1 - delta, 1 + delta]`.
    Bump,
    /// Indicator of `[1 - delta, 1 + delta]`. Discontinuous; useful as a
    /// closed-form reference for normalization constants.
    Box,
}

/// Analytic mother wavelet described by its Fourier transform, which is
/// real, nonnegative and supported in `[1 - delta, 1 + delta]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveletSpec {
    pub family: WaveletFamily,
    pub delta: f64,
}

impl Default for WaveletSpec {
    fn default() -> Self {
        Self {
            family: WaveletFamily::Bump,
            delta: 0.25,
        }
    }
}

impl WaveletSpec {
    pub fn bump(delta: f64) -> Result<Self> {
        Self::new(WaveletFamily::Bump, delta)
    }

    pub fn new(family: WaveletFamily, delta: f64) -> Result<Self> {
        let spec = Self { family, delta };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(invalid("delta", format!("must lie in (0, 1), got {}", self.delta)));
        }
        Ok(())
    }

    pub fn support(&self) -> (f64, f64) {
        (1.0 - self.delta, 1.0 + self.delta)
    }

    /// `psi_hat(z)`.
    pub fn spectrum(&self, z: f64) -> f64 {
        let x = (z - 1.0) / self.delta;
        if x.abs() >= 1.0 {
            return 0.0;
        }
        match self.family {
            WaveletFamily::Bump => (1.0 - 1.0 / (1.0 - x * x)).exp(),
            WaveletFamily::Box => 1.0,
        }
    }

    /// Effective half-length of the wavelet dilated to `scale`.
    pub fn time_radius(&self, scale: f64) -> f64 {
        scale * BUMP_COI_SPAN / self.delta
    }

    pub fn coi(&self) -> Coi {
        Coi::Wavelet {
            span: BUMP_COI_SPAN / self.delta,
        }
    }
}

/// `int_0^inf psi_hat(z) / z dz`.
pub fn admissibility_constant(wavelet: &WaveletSpec) -> f64 {
    let (lo, hi) = wavelet.support();
    quadrature::integrate(|z| wavelet.spectrum(z) / z, lo, hi, 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_surrogate_constant_is_log_ratio() {
        let w = WaveletSpec::new(WaveletFamily::Box, 0.1).unwrap();
        let c = admissibility_constant(&w);
        assert!((c - (11.0f64 / 9.0).ln()).abs() < 1e-12);
    }

    #[test]
    fn bump_peaks_at_one() {
        let w = WaveletSpec::default();
        assert!((w.spectrum(1.0) - 1.0).abs() < 1e-15);
        assert_eq!(w.spectrum(0.75), 0.0);
        assert_eq!(w.spectrum(1.25), 0.0);
        assert!(w.spectrum(1.1) > 0.0 && w.spectrum(1.1) < 1.0);
    }

    #[test]
    fn delta_out_of_range() {
        assert!(WaveletSpec::bump(0.0).is_err());
        assert!(WaveletSpec::bump(1.0).is_err());
    }
}
