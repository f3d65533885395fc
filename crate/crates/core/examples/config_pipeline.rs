//! Drives the full pipeline from a JSON configuration with overrides, the
//! way the `sst` binary does, and writes every artifact.
//!
//! cargo run --example config_pipeline [out_dir]

use std::path::PathBuf;

use synchrosqueeze::io::read_signal_csv;
use synchrosqueeze::pipeline::{cmd_analyze, cmd_synthesize, PipelineConfig};

fn main() -> synchrosqueeze::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "out/config_pipeline".into()));
    let mut config = PipelineConfig::from_json_str(
        r#"{
            "backend": "stft",
            "ridge": { "count": 2 },
            "squeeze": { "threshold": { "rule": "noise-adaptive" } }
        }"#,
    )?;
    config.apply_override("noise_power=1e-3")?;
    config.apply_override("seed=7")?;
    match config.apply_override("ridge.cuont=2") {
        Err(e) => println!("rejected as expected: {e}"),
        Ok(()) => unreachable!("unknown keys are rejected"),
    }

    // Synthesize writes the noisy signal; analysis then runs noise-free on it.
    cmd_synthesize(&config, "chirp", None, None, &out)?;
    let signal = read_signal_csv(std::fs::File::open(out.join("signal.csv"))?)?;
    config.noise_power = 0.0;
    let result = cmd_analyze(&config, &signal, &out.join("analysis"))?;
    println!(
        "{} ridges, threshold {:.3e}, dropped fraction {:.2e}",
        result.ridges.len(),
        result.squeezed.threshold,
        result.squeezed.report.dropped_fraction
    );
    for entry in std::fs::read_dir(out.join("analysis"))? {
        println!("  {}", entry?.file_name().to_string_lossy());
    }
    Ok(())
}
