//! Run configuration, named test signals, and the end-to-end analysis
//! behind the `sst` binary.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use crate::error::{Error, Result};
use crate::io;
use crate::reconstruct::{component_signal, reconstruct_all, BandPolicy, ComponentSet};
use crate::ridge::{density_index, extract_ridges, RidgeParams, RidgeSet};
use crate::signal::{
    add_white_noise, ground_truth_if, impulse_train, synthesize, validate_class, ClassReport, ComponentSpec,
    SampledSignal,
};
use crate::squeeze::{synchrosqueeze, SqueezeConfig, Squeezed, Threshold};
use crate::transform::{
    cwt_with_derivative, default_stft_grid, mstft_with_derivative, stft_grid, Backend, WaveletFamily, WaveletSpec,
    WindowFamily, WindowSpec, BUMP_COI_SPAN,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackendKind {
    Cwt,
    Stft,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CwtConfig {
    pub wavelet: WaveletFamily,
    pub delta: f64,
    pub n_voices: usize,
    /// Lowest analysed frequency; default: the frequency whose cone of
    /// influence just covers the whole signal.
    pub min_freq: Option<f64>,
    /// Highest analysed frequency; default: the highest whose wavelet band
    /// stays below Nyquist.
    pub max_freq: Option<f64>,
}

impl Default for CwtConfig {
    fn default() -> Self {
        Self {
            wavelet: WaveletFamily::Bump,
            delta: 0.25,
            n_voices: 32,
            min_freq: None,
            max_freq: None,
        }
    }
}

const DEFAULT_HALF_WIDTH: f64 = 0.35;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StftConfig {
    pub window: WindowFamily,
    /// Window half-width in time units; default 0.35, kept between 8 samples
    /// and a quarter of the signal duration.
    pub half_width: Option<f64>,
    /// Default: half the signal length.
    pub n_freqs: Option<usize>,
    /// Default: `rate / n`.
    pub min_freq: Option<f64>,
    /// Default: Nyquist.
    pub max_freq: Option<f64>,
}

impl Default for StftConfig {
    fn default() -> Self {
        Self {
            window: WindowFamily::TruncatedGaussian,
            half_width: None,
            n_freqs: None,
            min_freq: None,
            max_freq: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct SqueezeSection {
    pub threshold: Threshold,
    /// `M`; default covers the whole computed grid.
    pub band_limit: Option<f64>,
}

/// Everything a run depends on. Serialized as one JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub backend: BackendKind,
    pub cwt: CwtConfig,
    pub stft: StftConfig,
    pub squeeze: SqueezeSection,
    pub ridge: RidgeParams,
    pub band: BandPolicy,
    /// White noise power added to the signal (by `synthesize` before
    /// writing, by `analyze` before analysis).
    pub noise_power: f64,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            backend: BackendKind::Cwt,
            cwt: CwtConfig::default(),
            stft: StftConfig::default(),
            squeeze: SqueezeSection::default(),
            ridge: RidgeParams::default(),
            band: BandPolicy::default(),
            noise_power: 0.0,
            seed: 0,
        }
    }
}

fn config_error(field: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::Config {
        field: field.into(),
        reason: reason.into(),
    }
}

fn from_value(value: Value) -> Result<PipelineConfig> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let field = e.path().to_string();
        config_error(field, e.into_inner().to_string())
    })
}

impl PipelineConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| config_error("<document>", e.to_string()))?;
        let config = from_value(value)?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Applies `key=value`, where `key` is a dotted path such as
    /// `ridge.count` and `value` is JSON (bare words are taken as strings).
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, raw) = assignment
            .split_once('=')
            .ok_or_else(|| config_error(assignment, "expected key=value"))?;
        let key = key.trim();
        let parsed: Value = serde_json::from_str(raw.trim()).unwrap_or_else(|_| Value::String(raw.trim().to_string()));
        let mut doc = serde_json::to_value(&*self).expect("config serializes");
        let mut slot = &mut doc;
        for part in key.split('.') {
            slot = match slot {
                Value::Object(map) => map.get_mut(part).ok_or_else(|| config_error(key, "unknown key"))?,
                _ => return Err(config_error(key, "unknown key")),
            };
        }
        *slot = parsed;
        let updated = from_value(doc)?;
        updated.validate()?;
        *self = updated;
        Ok(())
    }

    /// Loads an optional JSON file, then applies overrides in order.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut config = match path {
            Some(p) => Self::from_json_str(&fs::read_to_string(p)?)?,
            None => Self::default(),
        };
        for o in overrides {
            config.apply_override(o)?;
        }
        Ok(config)
    }

    /// Signal-independent parameter checks.
    pub fn validate(&self) -> Result<()> {
        let named = |field: &str, r: Result<()>| r.map_err(|e| config_error(field, e.to_string()));
        named("cwt.delta", WaveletSpec::new(self.cwt.wavelet, self.cwt.delta).map(|_| ()))?;
        if self.cwt.n_voices < 4 {
            return Err(config_error("cwt.n_voices", "must be at least 4"));
        }
        let positive = |field: &str, v: Option<f64>| match v {
            Some(x) if !(x > 0.0 && x.is_finite()) => Err(config_error(field, format!("must be positive, got {x}"))),
            _ => Ok(()),
        };
        positive("cwt.min_freq", self.cwt.min_freq)?;
        positive("cwt.max_freq", self.cwt.max_freq)?;
        positive("stft.half_width", self.stft.half_width)?;
        positive("stft.min_freq", self.stft.min_freq)?;
        positive("stft.max_freq", self.stft.max_freq)?;
        if let Some(n) = self.stft.n_freqs {
            if n < 8 {
                return Err(config_error("stft.n_freqs", "must be at least 8"));
            }
        }
        match self.squeeze.threshold {
            Threshold::Absolute(v) | Threshold::Relative(v) if !(v >= 0.0 && v.is_finite()) => {
                return Err(config_error("squeeze.threshold", format!("must be non-negative, got {v}")));
            }
            _ => {}
        }
        if let Some(m) = self.squeeze.band_limit {
            if !(m > 1.0) {
                return Err(config_error("squeeze.band_limit", format!("must exceed 1, got {m}")));
            }
        }
        named("ridge", self.ridge.validate())?;
        named("band", self.band.validate())?;
        if !(self.noise_power >= 0.0 && self.noise_power.is_finite()) {
            return Err(config_error("noise_power", format!("must be non-negative, got {}", self.noise_power)));
        }
        Ok(())
    }

    pub fn wavelet(&self) -> WaveletSpec {
        WaveletSpec {
            family: self.cwt.wavelet,
            delta: self.cwt.delta,
        }
    }

    /// CWT scale range `(a_min, a_max)` for a signal.
    pub fn scale_range(&self, signal: &SampledSignal) -> Result<(f64, f64)> {
        let w = self.wavelet();
        let nyquist = 0.5 * signal.sample_rate();
        let f_max = self.cwt.max_freq.unwrap_or(nyquist / (1.0 + w.delta) * (1.0 - 1e-12));
        let f_min = self
            .cwt
            .min_freq
            .unwrap_or(2.0 * BUMP_COI_SPAN / w.delta / signal.duration());
        if !(f_min < f_max) {
            return Err(config_error(
                "cwt.min_freq",
                format!("lowest frequency {f_min} must be below highest frequency {f_max}"),
            ));
        }
        Ok((1.0 / f_max, 1.0 / f_min))
    }

    pub fn window(&self, signal: &SampledSignal) -> Result<WindowSpec> {
        let hw = self.stft.half_width.unwrap_or_else(|| {
            let floor = 8.0 / signal.sample_rate();
            DEFAULT_HALF_WIDTH.min(0.25 * signal.duration()).max(floor)
        });
        WindowSpec::new(self.stft.window, hw)
    }

    pub fn squeeze_config(&self) -> SqueezeConfig {
        SqueezeConfig {
            threshold: self.squeeze.threshold,
            band_limit: self.squeeze.band_limit,
            target: None,
        }
    }
}

/// A named test signal.
#[derive(Debug, Clone)]
pub struct Preset {
    pub name: &'static str,
    pub sample_rate: f64,
    pub duration: f64,
    /// Real presets keep only the real part of the synthesized components.
    pub real: bool,
}

pub const PRESETS: [Preset; 4] = [
    Preset {
        name: "fig1",
        sample_rate: 100.0,
        duration: 10.0,
        real: true,
    },
    Preset {
        name: "two-tone",
        sample_rate: 128.0,
        duration: 8.0,
        real: false,
    },
    Preset {
        name: "chirp",
        sample_rate: 64.0,
        duration: 8.0,
        real: false,
    },
    Preset {
        name: "impulse-train",
        sample_rate: 100.0,
        duration: 8.0,
        real: true,
    },
];

pub fn preset(name: &str) -> Result<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name).ok_or_else(|| Error::UnknownPreset {
        name: name.to_string(),
        available: PRESETS.iter().map(|p| p.name).collect::<Vec<_>>().join(", "),
    })
}

/// A synthesized preset with its analytic components, if any.
#[derive(Debug, Clone)]
pub struct Synthesis {
    pub signal: SampledSignal,
    pub components: Vec<ComponentSpec>,
    pub class: Option<ClassReport>,
}

impl Preset {
    pub fn components(&self) -> Vec<ComponentSpec> {
        match self.name {
            "fig1" => vec![ComponentSpec::fig1()],
            "two-tone" => vec![ComponentSpec::tone(1.0, 5.0), ComponentSpec::tone(1.0, 12.0)],
            "chirp" => vec![ComponentSpec::linear_chirp(1.0, 2.0, 2.0)],
            _ => Vec::new(),
        }
    }

    pub fn synthesize(&self, sample_rate: Option<f64>, duration: Option<f64>) -> Result<Synthesis> {
        let rate = sample_rate.unwrap_or(self.sample_rate);
        let duration = duration.unwrap_or(self.duration);
        let components = self.components();
        let signal = if components.is_empty() {
            // Impulses every 1/6 time unit.
            let events: Vec<f64> = (1..).map(|k| k as f64 / 6.0).take_while(|&t| t < duration).collect();
            impulse_train(&events, &vec![1.0; events.len()], rate, duration)?
        } else {
            synthesize(&components, rate, duration)?
        };
        let signal = if self.real { signal.real_part() } else { signal };
        let class = if components.is_empty() {
            None
        } else {
            Some(validate_class(&components, rate, duration, 1e-3, 1.0 / 3.0)?)
        };
        Ok(Synthesis {
            signal,
            components,
            class,
        })
    }
}

fn with_noise(signal: SampledSignal, config: &PipelineConfig) -> Result<SampledSignal> {
    if config.noise_power > 0.0 {
        add_white_noise(&signal, config.noise_power, config.seed)
    } else {
        Ok(signal)
    }
}

/// Writes `signal.csv`, and for analytic presets `if.csv` (`time,if_0,...`)
/// and `class.json`.
pub fn cmd_synthesize(
    config: &PipelineConfig,
    name: &str,
    sample_rate: Option<f64>,
    duration: Option<f64>,
    out_dir: &Path,
) -> Result<Synthesis> {
    let preset = preset(name)?;
    let mut synth = preset.synthesize(sample_rate, duration)?;
    synth.signal = with_noise(synth.signal, config)?;
    fs::create_dir_all(out_dir)?;
    io::write_signal_csv(BufWriter::new(File::create(out_dir.join("signal.csv"))?), &synth.signal)?;
    if !synth.components.is_empty() {
        let times = synth.signal.times();
        let truths = synth
            .components
            .iter()
            .map(|c| ground_truth_if(c, &times))
            .collect::<Result<Vec<_>>>()?;
        let mut w = csv::Writer::from_writer(BufWriter::new(File::create(out_dir.join("if.csv"))?));
        let mut header = vec!["time".to_string()];
        header.extend((0..truths.len()).map(|k| format!("if_{k}")));
        w.write_record(&header).map_err(|e| Error::Io(e.into()))?;
        for (n, t) in times.iter().enumerate() {
            let mut rec = vec![t.to_string()];
            rec.extend(truths.iter().map(|tr| tr[n].to_string()));
            w.write_record(&rec).map_err(|e| Error::Io(e.into()))?;
        }
        w.flush()?;
    }
    if let Some(class) = &synth.class {
        fs::write(out_dir.join("class.json"), serde_json::to_string_pretty(class)? + "\n")?;
    }
    Ok(synth)
}

/// Products of one analysis run.
#[derive(Debug, Clone)]
pub struct AnalysisOutput {
    pub backend: Backend,
    /// `"scale"` for the CWT, `"frequency"` for the STFT.
    pub transform_axis: &'static str,
    pub transform_axis_values: Vec<f64>,
    pub transform_values: Array2<Complex64>,
    pub transform_coi: Array2<bool>,
    /// True when the transform's rows run from low to high frequency.
    pub transform_rows_ascending: bool,
    pub squeezed: Squeezed,
    pub ridges: RidgeSet,
    pub density: Vec<f64>,
    pub components: ComponentSet,
    /// Components on the input grid; `2 Re` for real inputs.
    pub component_signals: Vec<SampledSignal>,
}

/// Transform, squeeze, ridges and reconstruction with the configured backend.
pub fn analyze(signal: &SampledSignal, config: &PipelineConfig) -> Result<AnalysisOutput> {
    config.validate()?;
    let squeeze = config.squeeze_config();
    let (backend, axis, axis_values, values, coi, ascending, squeezed) = match config.backend {
        BackendKind::Cwt => {
            let w = config.wavelet();
            let (v, d) = cwt_with_derivative(signal, &w, config.cwt.n_voices, config.scale_range(signal)?)?;
            let a = synchrosqueeze(v, d, Backend::Cwt(w), &squeeze)?;
            let scales = a.plane.scales().to_vec();
            let coi = a.plane.coi_mask().clone();
            (a.backend, "scale", scales, a.plane.values().clone(), coi, false, a.squeezed)
        }
        BackendKind::Stft => {
            let w = config.window(signal)?;
            let grid = match (config.stft.n_freqs, config.stft.min_freq, config.stft.max_freq) {
                (None, None, None) => default_stft_grid(signal)?,
                (n, lo, hi) => {
                    let n = n.unwrap_or((signal.len() / 2).max(8));
                    let nyquist = 0.5 * signal.sample_rate();
                    stft_grid(lo.unwrap_or(nyquist / n as f64), hi.unwrap_or(nyquist), n)?
                }
            };
            let (v, d) = mstft_with_derivative(signal, &w, &grid)?;
            let a = synchrosqueeze(v, d, Backend::Stft(w), &squeeze)?;
            let freqs = a.plane.freqs().to_vec();
            let coi = a.plane.coi_mask().clone();
            (a.backend, "frequency", freqs, a.plane.values().clone(), coi, true, a.squeezed)
        }
    };
    let ridges = extract_ridges(&squeezed.plane, &config.ridge)?;
    let density = density_index(&ridges);
    let components = reconstruct_all(&squeezed.plane, &ridges, &config.band, &backend)?;
    let component_signals = components
        .components
        .iter()
        .map(|c| component_signal(c, signal))
        .collect::<Result<Vec<_>>>()?;
    Ok(AnalysisOutput {
        backend,
        transform_axis: axis,
        transform_axis_values: axis_values,
        transform_values: values,
        transform_coi: coi,
        transform_rows_ascending: ascending,
        squeezed,
        ridges,
        density,
        components,
        component_signals,
    })
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

/// Runs [`analyze`] and writes every artifact into `out_dir`:
/// `config.json`, `transform.csv`, `transform.pgm`, `squeezed.csv`,
/// `squeezed.pgm`, `squeeze_report.json`, `ridges.csv`, `density.csv`,
/// `component_<k>.csv` and `manifest.json`.
pub fn cmd_analyze(config: &PipelineConfig, input: &SampledSignal, out_dir: &Path) -> Result<AnalysisOutput> {
    let signal = with_noise(input.clone(), config)?;
    let out = analyze(&signal, config)?;
    fs::create_dir_all(out_dir)?;
    fs::write(out_dir.join("config.json"), config.to_json_pretty() + "\n")?;
    let times = signal.times();
    io::write_plane_csv(
        create(out_dir, "transform.csv")?,
        out.transform_axis,
        &out.transform_axis_values,
        &times,
        &out.transform_values,
    )?;
    io::write_pgm(
        create(out_dir, "transform.pgm")?,
        &out.transform_values,
        &out.transform_coi,
        out.transform_rows_ascending,
    )?;
    let sq = &out.squeezed.plane;
    io::write_plane_csv(create(out_dir, "squeezed.csv")?, "frequency", sq.freqs(), &times, sq.values())?;
    io::write_pgm(create(out_dir, "squeezed.pgm")?, sq.values(), sq.coi_mask(), true)?;
    io::write_report_json(create(out_dir, "squeeze_report.json")?, &out.squeezed.report)?;
    io::write_ridges_csv(create(out_dir, "ridges.csv")?, &out.ridges)?;
    io::write_density_csv(create(out_dir, "density.csv")?, &times, &out.density)?;
    for (k, s) in out.component_signals.iter().enumerate() {
        io::write_signal_csv(create(out_dir, &format!("component_{k}.csv"))?, s)?;
    }
    let entries = io::manifest(&out.components, &signal, &out.component_signals);
    io::write_manifest_json(create(out_dir, "manifest.json")?, &entries)?;
    Ok(out)
}
