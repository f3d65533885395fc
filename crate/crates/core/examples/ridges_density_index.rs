//! Ridge extraction and the density index on a signal that gains a second
//! tone halfway through.
//!
//! cargo run --example ridges_density_index

use num_complex::Complex64;
use std::f64::consts::TAU;

use synchrosqueeze::pipeline::{analyze, BackendKind, PipelineConfig};
use synchrosqueeze::signal::{synthesize, ComponentSpec};

fn main() -> synchrosqueeze::Result<()> {
    let (rate, duration, switch) = (64.0, 16.0, 8.0);
    let low = synthesize(&[ComponentSpec::tone(1.0, 5.0)], rate, duration)?;
    let samples = low
        .samples()
        .iter()
        .zip(low.times())
        .map(|(z, t)| if t >= switch { z + Complex64::from_polar(1.0, TAU * 12.0 * t) } else { *z })
        .collect();
    let signal = low.with_samples(samples)?;

    for backend in [BackendKind::Cwt, BackendKind::Stft] {
        let config = PipelineConfig {
            backend,
            ..PipelineConfig::default()
        };
        let out = analyze(&signal, &config)?;
        println!("{} (penalty {:.3e}):", out.backend.name(), out.ridges.penalty);
        for r in &out.ridges.ridges {
            println!(
                "  rank {} covers t = {:.2}..{:.2}, mean frequency {:.2}",
                r.rank,
                out.ridges.times[r.start],
                out.ridges.times[r.end() - 1],
                r.mean_frequency()
            );
        }
        let di = &out.density;
        let jump = (1..di.len()).max_by(|&a, &b| (di[a] - di[a - 1]).total_cmp(&(di[b] - di[b - 1]))).unwrap();
        println!("  density index jumps {:.2} -> {:.2} at t = {:.3}", di[jump - 1], di[jump], out.ridges.times[jump]);
    }
    Ok(())
}
