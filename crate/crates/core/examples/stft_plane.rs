//! Modified short-time Fourier transform of an impulse train: every column
//! peaks at multiples of the repetition rate.
//!
//! cargo run --example stft_plane

use synchrosqueeze::signal::impulse_train;
use synchrosqueeze::transform::{mstft, window_energy, FrequencyGrid, WindowSpec};

fn main() -> synchrosqueeze::Result<()> {
    let (rate, duration) = (96.0, 8.0);
    let events: Vec<f64> = (1..48).map(|k| k as f64 / 6.0).collect();
    let signal = impulse_train(&events, &vec![1.0; events.len()], rate, duration)?;

    let window = WindowSpec::gaussian(0.5)?;
    println!("window: G(0) = {:.6}, energy {:.6}", window.inversion_constant(), window_energy(&window));
    let grid = FrequencyGrid::arithmetic(0.5, 0.5, 80)?;
    let plane = mstft(&signal, &window, &grid)?;

    let n = signal.len() / 2;
    let mags: Vec<f64> = (0..grid.len()).map(|m| plane.values()[[m, n]].norm()).collect();
    let peaks: Vec<f64> = (1..mags.len() - 1)
        .filter(|&m| mags[m] > mags[m - 1] && mags[m] > mags[m + 1])
        .map(|m| grid.centers()[m])
        .collect();
    println!("column at t = {:.2}: local maxima at {peaks:?}", plane.times()[n]);
    Ok(())
}
