use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::error::{invalid, Result};
use crate::quadrature;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WindowFamily {
    /// Gaussian with standard deviation `half_width / 3`, shifted and
    /// quadratically corrected so the window and its derivative vanish at
    /// the support edge.
    TruncatedGaussian,
    /// `cos^2(pi t / (2 half_width))`.
    RaisedCosine,
}

/// Even, nonnegative, C1 window supported on `[-half_width, half_width]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub family: WindowFamily,
    pub half_width: f64,
    #[serde(default = "unit")]
    pub amplitude: f64,
}

fn unit() -> f64 {
    1.0
}

impl WindowSpec {
    pub fn new(family: WindowFamily, half_width: f64) -> Result<Self> {
        let spec = Self {
            family,
            half_width,
            amplitude: 1.0,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn gaussian(half_width: f64) -> Result<Self> {
        Self::new(WindowFamily::TruncatedGaussian, half_width)
    }

    pub fn raised_cosine(half_width: f64) -> Result<Self> {
        Self::new(WindowFamily::RaisedCosine, half_width)
    }

    pub fn scaled(self, amplitude: f64) -> Self {
        Self { amplitude, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.half_width > 0.0 && self.half_width.is_finite()) {
            return Err(invalid("half_width", format!("must be positive, got {}", self.half_width)));
        }
        if !(self.amplitude > 0.0 && self.amplitude.is_finite()) {
            return Err(invalid("amplitude", format!("must be positive, got {}", self.amplitude)));
        }
        Ok(())
    }

    fn sigma(&self) -> f64 {
        self.half_width / 3.0
    }

    /// `G(t)`.
    pub fn value(&self, t: f64) -> f64 {
        let hw = self.half_width;
        if t.abs() >= hw {
            return 0.0;
        }
        let g = match self.family {
            WindowFamily::TruncatedGaussian => {
                let s2 = self.sigma().powi(2);
                let edge = (-0.5 * hw * hw / s2).exp();
                (-0.5 * t * t / s2).exp() - edge + edge * (t * t - hw * hw) / (2.0 * s2)
            }
            WindowFamily::RaisedCosine => (0.5 * PI * t / hw).cos().powi(2),
        };
        self.amplitude * g
    }

    /// `G'(t)`.
    pub fn derivative(&self, t: f64) -> f64 {
        let hw = self.half_width;
        if t.abs() >= hw {
            return 0.0;
        }
        let dg = match self.family {
            WindowFamily::TruncatedGaussian => {
                let s2 = self.sigma().powi(2);
                let edge = (-0.5 * hw * hw / s2).exp();
                -t / s2 * (-0.5 * t * t / s2).exp() + edge * t / s2
            }
            WindowFamily::RaisedCosine => -0.5 * PI / hw * (PI * t / hw).sin(),
        };
        self.amplitude * dg
    }

    /// `G(0)`: integrating a modified STFT over all frequencies returns
    /// `G(0) f(t)`, so this constant normalizes the STFT inversion.
    pub fn inversion_constant(&self) -> f64 {
        self.value(0.0)
    }

    /// `G_hat(s) = int G(t) exp(-2 pi i s t) dt`, real and even.
    pub fn spectrum(&self, s: f64) -> f64 {
        let hw = self.half_width;
        let panels = (hw * s.abs()).ceil() as usize + 4;
        let (nodes, weights) = quadrature::composite_gauss_legendre(0.0, hw, panels, 16);
        2.0 * nodes
            .iter()
            .zip(&weights)
            .map(|(&t, &w)| w * self.value(t) * (TAU * s * t).cos())
            .sum::<f64>()
    }
}

/// `int |G(t)|^2 dt`.
pub fn window_energy(window: &WindowSpec) -> f64 {
    let hw = window.half_width;
    quadrature::integrate(|t| window.value(t).powi(2), -hw, hw, 1e-12)
}

/// Tabulated window spectrum on `[0, s_max]` with 4-point Lagrange
/// interpolation; spacing `1 / (128 half_width)` keeps interpolation error
/// near 1e-8 of the peak.
#[derive(Debug, Clone)]
pub(crate) struct WindowSpectrum {
    step: f64,
    values: Vec<f64>,
}

impl WindowSpectrum {
    pub(crate) fn build(window: &WindowSpec, s_max: f64) -> Self {
        let hw = window.half_width;
        let step = 1.0 / (128.0 * hw);
        let count = (s_max / step).ceil() as usize + 4;
        let panels = (hw * s_max).ceil() as usize + 4;
        let (nodes, weights) = quadrature::composite_gauss_legendre(0.0, hw, panels, 16);
        let mut values = vec![0.0; count];
        for (&t, &w) in nodes.iter().zip(&weights) {
            let amp = 2.0 * w * window.value(t);
            let rot = Complex64::from_polar(1.0, TAU * step * t);
            let mut phasor = Complex64::new(1.0, 0.0);
            for (j, v) in values.iter_mut().enumerate() {
                if j % 256 == 0 {
                    // Re-anchor to bound accumulated rounding in the recurrence.
                    phasor = Complex64::from_polar(1.0, TAU * step * j as f64 * t);
                }
                *v += amp * phasor.re;
                phasor *= rot;
            }
        }
        Self { step, values }
    }

    pub(crate) fn eval(&self, s: f64) -> f64 {
        let x = s.abs() / self.step;
        let i = x.floor() as usize;
        if i + 2 >= self.values.len() {
            return 0.0;
        }
        let u = x - i as f64;
        let at = |k: isize| self.values[k.unsigned_abs()];
        let i = i as isize;
        let (p0, p1, p2, p3) = (at(i - 1), at(i), at(i + 1), at(i + 2));
        // Lagrange basis on nodes -1, 0, 1, 2.
        -p0 * u * (u - 1.0) * (u - 2.0) / 6.0 + p1 * (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0
            - p2 * (u + 1.0) * u * (u - 2.0) / 2.0
            + p3 * (u + 1.0) * u * (u - 1.0) / 6.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raised_cosine_spectrum(hw: f64, s: f64) -> f64 {
        let sinc = |x: f64| if x == 0.0 { 1.0 } else { (PI * x).sin() / (PI * x) };
        let c = 1.0 / (2.0 * hw);
        hw * sinc(2.0 * hw * s) + 0.5 * hw * (sinc(2.0 * hw * (s - c)) + sinc(2.0 * hw * (s + c)))
    }

    #[test]
    fn gaussian_window_is_c1_at_edge() {
        let w = WindowSpec::gaussian(0.3).unwrap();
        let eps = 1e-7;
        assert!(w.value(0.3 - eps).abs() < 1e-9);
        assert!(w.derivative(0.3 - eps).abs() < 1e-6);
        assert!(w.value(0.0) > 0.9);
        for k in 0..100 {
            let t = -0.3 + 0.006 * k as f64;
            assert!(w.value(t) >= 0.0);
        }
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        for w in [WindowSpec::gaussian(0.4).unwrap(), WindowSpec::raised_cosine(0.4).unwrap()] {
            for &t in &[-0.3, -0.1, 0.05, 0.2, 0.35] {
                let h = 1e-6;
                let fd = (w.value(t + h) - w.value(t - h)) / (2.0 * h);
                assert!((fd - w.derivative(t)).abs() < 1e-6, "{t}");
            }
        }
    }

    #[test]
    fn raised_cosine_energy_is_three_quarters() {
        let w = WindowSpec::raised_cosine(1.0).unwrap();
        assert!((window_energy(&w) - 0.75).abs() < 1e-12);
    }

    #[test]
    fn spectrum_matches_closed_form() {
        let w = WindowSpec::raised_cosine(0.5).unwrap();
        for &s in &[0.0, 0.3, 1.7, 4.2, 25.0, 63.9] {
            let exact = raised_cosine_spectrum(0.5, s);
            assert!((w.spectrum(s) - exact).abs() < 1e-13, "{s}");
        }
        let table = WindowSpectrum::build(&w, 80.0);
        for &s in &[0.0, 0.3, 1.7, -4.2, 25.0, 63.9, 79.0] {
            let exact = raised_cosine_spectrum(0.5, s);
            assert!((table.eval(s) - exact).abs() < 2e-8 * exact.abs().max(1.0) * 0.5, "{s}");
        }
    }
}
