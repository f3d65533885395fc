use ndarray::Array2;
use num_complex::Complex64;

use super::{WaveletSpec, WindowSpec};
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    Geometric,
    Arithmetic,
    Custom,
}

/// Increasing positive frequency bins. Bin `m` covers `(edges[m], edges[m+1]]`
/// with edges at the midpoints between centers, so a value exactly midway
/// between two centers belongs to the lower bin.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    centers: Vec<f64>,
    edges: Vec<f64>,
    kind: GridKind,
}

impl FrequencyGrid {
    pub fn from_centers(centers: Vec<f64>, kind: GridKind) -> Result<Self> {
        if centers.len() < 2 {
            return Err(invalid("frequency grid", "needs at least two bins"));
        }
        if centers[0] <= 0.0 || !centers.iter().all(|c| c.is_finite()) {
            return Err(invalid("frequency grid", "frequencies must be positive and finite"));
        }
        if centers.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("frequency grid", "frequencies must be strictly increasing"));
        }
        let n = centers.len();
        let mut edges = Vec::with_capacity(n + 1);
        edges.push(centers[0] - 0.5 * (centers[1] - centers[0]));
        for w in centers.windows(2) {
            edges.push(0.5 * (w[0] + w[1]));
        }
        edges.push(centers[n - 1] + 0.5 * (centers[n - 1] - centers[n - 2]));
        Ok(Self { centers, edges, kind })
    }

    /// `count` bins `start, start + step, ...`.
    pub fn arithmetic(start: f64, step: f64, count: usize) -> Result<Self> {
        let centers = (0..count).map(|m| start + step * m as f64).collect();
        Self::from_centers(centers, GridKind::Arithmetic)
    }

    /// `count` bins spanning `[min, max]` inclusive with constant ratio.
    pub fn geometric(min: f64, max: f64, count: usize) -> Result<Self> {
        if count < 2 || min <= 0.0 || max <= min {
            return Err(invalid("frequency grid", "geometric grid needs 0 < min < max and two bins"));
        }
        let ratio = (max / min).ln() / (count - 1) as f64;
        let centers = (0..count).map(|m| min * (ratio * m as f64).exp()).collect();
        Self::from_centers(centers, GridKind::Geometric)
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn width(&self, m: usize) -> f64 {
        self.edges[m + 1] - self.edges[m]
    }

    pub fn widths(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Bin nearest to `freq`, or `None` outside `(edges[0], edges[last]]`.
    pub fn locate(&self, freq: f64) -> Option<usize> {
        let last = *self.edges.last().expect("grid has edges");
        if !(freq > self.edges[0] && freq <= last) {
            return None;
        }
        // First edge >= freq, minus one.
        let idx = self.edges.partition_point(|&e| e < freq);
        Some(idx - 1)
    }

    /// Median log-spacing between adjacent centers.
    pub fn typical_log_step(&self) -> f64 {
        let mut steps: Vec<f64> = self.centers.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
        steps.sort_by(f64::total_cmp);
        steps[steps.len() / 2]
    }
}

/// Rule deciding which cells are contaminated by the signal endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coi {
    /// Radius `span / frequency`, the wavelet's effective half-length at scale `1 / frequency`.
    Wavelet { span: f64 },
    /// Fixed radius: the window half-width.
    Window { half_width: f64 },
}

impl Coi {
    pub fn radius(&self, freq: f64) -> f64 {
        match *self {
            Coi::Wavelet { span } => span / freq,
            Coi::Window { half_width } => half_width,
        }
    }

    /// Mask over `(frequency row, time)`.
    pub fn mask(&self, freqs: &[f64], times: &[f64]) -> Array2<bool> {
        let (first, last) = (times[0], times[times.len() - 1]);
        Array2::from_shape_fn((freqs.len(), times.len()), |(m, n)| {
            let r = self.radius(freqs[m]);
            times[n] - first < r || last - times[n] < r
        })
    }
}

/// Which transform produced a plane, with its analysis function.
#[derive(Debug, Clone, PartialEq)]
pub enum Backend {
    Cwt(WaveletSpec),
    Stft(WindowSpec),
}

impl Backend {
    /// Normalization dividing the band integral of a squeezed plane.
    pub fn inversion_constant(&self) -> f64 {
        match self {
            Backend::Cwt(w) => super::admissibility_constant(w),
            Backend::Stft(w) => w.inversion_constant(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Backend::Cwt(_) => "cwt",
            Backend::Stft(_) => "stft",
        }
    }
}

/// CWT values indexed by `(scale, time)`; scales increase geometrically.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeScalePlane {
    pub(crate) values: Array2<Complex64>,
    pub(crate) scales: Vec<f64>,
    pub(crate) times: Vec<f64>,
    pub(crate) coi: Array2<bool>,
    pub(crate) wavelet: WaveletSpec,
    pub(crate) n_voices: usize,
}

impl TimeScalePlane {
    pub fn values(&self) -> &Array2<Complex64> {
        &self.values
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn coi_mask(&self) -> &Array2<bool> {
        &self.coi
    }

    pub fn wavelet(&self) -> &WaveletSpec {
        &self.wavelet
    }

    pub fn n_voices(&self) -> usize {
        self.n_voices
    }

    /// Center frequency `1 / a` of each scale row.
    pub fn frequencies(&self) -> Vec<f64> {
        self.scales.iter().map(|a| 1.0 / a).collect()
    }

    /// Measure `da` of row `j` on the geometric grid.
    pub fn scale_step(&self, j: usize) -> f64 {
        self.scales[j] * std::f64::consts::LN_2 / self.n_voices as f64
    }

    pub fn coi_rule(&self) -> Coi {
        self.wavelet.coi()
    }

    /// Squeezing grid `{1 / a_j}` in increasing order.
    pub fn default_target_grid(&self) -> FrequencyGrid {
        let mut f = self.frequencies();
        f.reverse();
        FrequencyGrid::from_centers(f, GridKind::Geometric).expect("scale grid is valid")
    }

    pub fn map_values(&self, values: Array2<Complex64>) -> Self {
        Self { values, ..self.clone() }
    }
}

/// Values indexed by `(frequency, time)`: a modified STFT or a squeezed plane.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeFrequencyPlane {
    pub(crate) values: Array2<Complex64>,
    pub(crate) grid: FrequencyGrid,
    pub(crate) times: Vec<f64>,
    pub(crate) coi: Array2<bool>,
    pub(crate) coi_rule: Coi,
}

impl TimeFrequencyPlane {
    pub fn new(values: Array2<Complex64>, grid: FrequencyGrid, times: Vec<f64>, coi_rule: Coi) -> Result<Self> {
        if values.dim() != (grid.len(), times.len()) {
            return Err(Error::GridMismatch(format!(
                "values are {:?} but grid has {} bins and {} times",
                values.dim(),
                grid.len(),
                times.len()
            )));
        }
        let coi = coi_rule.mask(grid.centers(), &times);
        Ok(Self {
            values,
            grid,
            times,
            coi,
            coi_rule,
        })
    }

    pub fn values(&self) -> &Array2<Complex64> {
        &self.values
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn freqs(&self) -> &[f64] {
        self.grid.centers()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn coi_mask(&self) -> &Array2<bool> {
        &self.coi
    }

    pub fn coi_rule(&self) -> Coi {
        self.coi_rule
    }

    pub fn map_values(&self, values: Array2<Complex64>) -> Self {
        Self { values, ..self.clone() }
    }

    pub fn max_magnitude(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}
