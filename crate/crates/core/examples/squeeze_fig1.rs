//! Four views of the fig1 preset signal: CWT, squeezed CWT, STFT and
//! squeezed STFT, written as PGM images.
//!
//! cargo run --example squeeze_fig1 [out_dir]

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::PathBuf;

use synchrosqueeze::io::write_pgm;
use synchrosqueeze::pipeline::PipelineConfig;
use synchrosqueeze::signal::{synthesize, ComponentSpec};
use synchrosqueeze::squeeze::synchrosqueeze;
use synchrosqueeze::transform::{cwt_with_derivative, default_stft_grid, mstft_with_derivative, Backend};

/// Share of the plane's total magnitude held by its largest 5% of cells.
fn concentration(values: &ndarray::Array2<num_complex::Complex64>) -> f64 {
    let mut mags: Vec<f64> = values.iter().map(|z| z.norm()).collect();
    let total: f64 = mags.iter().sum();
    mags.sort_by(|a, b| b.total_cmp(a));
    mags[..mags.len() / 20].iter().sum::<f64>() / total
}

fn main() -> synchrosqueeze::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "out/squeeze_fig1".into()));
    fs::create_dir_all(&out)?;
    let signal = synthesize(&[ComponentSpec::fig1()], 100.0, 10.0)?.real_part();
    let config = PipelineConfig::default();

    let wavelet = config.wavelet();
    let (v, d) = cwt_with_derivative(&signal, &wavelet, 32, config.scale_range(&signal)?)?;
    let cwt = synchrosqueeze(v, d, Backend::Cwt(wavelet), &config.squeeze_config())?;
    // Scale rows run from high to low frequency.
    write_pgm(BufWriter::new(File::create(out.join("cwt.pgm"))?), cwt.plane.values(), cwt.plane.coi_mask(), false)?;
    let sq = &cwt.squeezed.plane;
    write_pgm(BufWriter::new(File::create(out.join("cwt_squeezed.pgm"))?), sq.values(), sq.coi_mask(), true)?;

    let window = config.window(&signal)?;
    let (v, d) = mstft_with_derivative(&signal, &window, &default_stft_grid(&signal)?)?;
    let stft = synchrosqueeze(v, d, Backend::Stft(window), &config.squeeze_config())?;
    write_pgm(BufWriter::new(File::create(out.join("stft.pgm"))?), stft.plane.values(), stft.plane.coi_mask(), true)?;
    let sq = &stft.squeezed.plane;
    write_pgm(BufWriter::new(File::create(out.join("stft_squeezed.pgm"))?), sq.values(), sq.coi_mask(), true)?;

    println!("top-5% magnitude share:");
    println!("  cwt   {:.3} -> squeezed {:.3}", concentration(cwt.plane.values()), concentration(cwt.squeezed.plane.values()));
    println!("  stft  {:.3} -> squeezed {:.3}", concentration(stft.plane.values()), concentration(stft.squeezed.plane.values()));
    println!("images written to {}", out.display());
    Ok(())
}
