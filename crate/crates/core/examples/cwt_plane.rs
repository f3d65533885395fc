//! Continuous wavelet transform of the fig1 preset signal and its phase
//! transform: how many cells survive the threshold and how close the
//! frequency estimate is to the true instantaneous frequency.
//!
//! cargo run --example cwt_plane

use synchrosqueeze::signal::{ground_truth_if, synthesize, ComponentSpec};
use synchrosqueeze::squeeze::{phase_transform_of, Threshold};
use synchrosqueeze::transform::{admissibility_constant, cwt_with_derivative, WaveletSpec};

fn main() -> synchrosqueeze::Result<()> {
    let spec = ComponentSpec::fig1();
    let signal = synthesize(std::slice::from_ref(&spec), 100.0, 10.0)?.real_part();
    let wavelet = WaveletSpec::bump(0.25)?;
    println!("bump wavelet, delta 0.25, C = {:.12}", admissibility_constant(&wavelet));

    let (plane, deriv) = cwt_with_derivative(&signal, &wavelet, 32, (1.0 / 40.0, 1.0 / 1.6))?;
    let (rows, cols) = plane.values().dim();
    let coi = plane.coi_mask().iter().filter(|&&c| c).count();
    println!("{rows} scales x {cols} times, {:.1}% of cells inside the cone of influence", 100.0 * coi as f64 / (rows * cols) as f64);

    let threshold = Threshold::Relative(1e-2).resolve(&plane)?;
    let phase = phase_transform_of(&plane, &deriv, threshold)?;
    let truth = ground_truth_if(&spec, plane.times())?;

    // At each interior column, the strongest cell's frequency estimate.
    let mut worst: f64 = 0.0;
    for n in (0..cols).step_by(100) {
        let column = plane.values().column(n);
        let (j, _) = column
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .expect("nonempty column");
        if plane.coi_mask()[[j, n]] {
            continue;
        }
        let omega = phase.omega[[j, n]];
        worst = worst.max((omega - truth[n]).abs() / truth[n]);
        println!("t = {:4.1}: true IF {:6.2}, estimate {:6.2}", plane.times()[n], truth[n], omega);
    }
    println!("{} valid cells, worst relative error shown {:.3}", phase.valid_count(), worst);
    Ok(())
}
