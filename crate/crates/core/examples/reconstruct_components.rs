//! Separates two slowly varying chirps and compares each recovered
//! component with the generator.
//!
//! cargo run --example reconstruct_components

use synchrosqueeze::pipeline::{analyze, BackendKind, PipelineConfig};
use synchrosqueeze::reconstruct::BandPolicy;
use synchrosqueeze::signal::{ground_truth_if, synthesize, ComponentSpec};

fn main() -> synchrosqueeze::Result<()> {
    let specs = [ComponentSpec::linear_chirp(1.0, 5.0, 0.1), ComponentSpec::linear_chirp(0.6, 14.0, 0.3)];
    let signal = synthesize(&specs, 64.0, 16.0)?;
    let times = signal.times();

    for (backend, band) in [
        (BackendKind::Cwt, BandPolicy::default()),
        (BackendKind::Cwt, BandPolicy::Fixed { half_width: 0.2 }),
        (BackendKind::Stft, BandPolicy::default()),
    ] {
        let config = PipelineConfig {
            backend,
            band,
            ..PipelineConfig::default()
        };
        let out = analyze(&signal, &config)?;
        let plane = &out.squeezed.plane;
        println!("{} with {:?}:", out.backend.name(), band);
        for (k, (c, spec)) in out.components.components.iter().zip(&specs).enumerate() {
            let truth = ground_truth_if(spec, &times)?;
            let (mut num, mut den) = (0.0, 0.0);
            for n in 0..times.len() {
                let interior = plane.grid().locate(truth[n]).is_some_and(|m| !plane.coi_mask()[[m, n]]);
                if interior {
                    num += (c.samples[n] - spec.value(times[n])).norm_sqr();
                    den += spec.value(times[n]).norm_sqr();
                }
            }
            println!(
                "  component {k}: relative error {:.2e}, {} overlapping columns, {} missing",
                (num / den).sqrt(),
                c.overlap_count(),
                c.missing_count()
            );
        }
    }
    Ok(())
}
