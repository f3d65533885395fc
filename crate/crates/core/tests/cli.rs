use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use synchrosqueeze::io::read_signal_csv;
use synchrosqueeze::pipeline::{preset, PipelineConfig};

fn sst(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sst")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn synthesize_fig1_writes_every_sample() {
    let dir = tempfile::tempdir().unwrap();
    let out = sst(&["synthesize", "fig1", "--rate", "100", "--duration", "10", "-o", path(dir.path())]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = fs::read_to_string(dir.path().join("signal.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("time,real,imag"));
    assert_eq!(lines.count(), 1000);
    assert!(dir.path().join("if.csv").exists());
}

#[test]
fn synthesize_two_tone_reports_separation() {
    let dir = tempfile::tempdir().unwrap();
    let out = sst(&["synthesize", "two-tone", "-o", path(dir.path())]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("d = 0.411765"));
    let class: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("class.json")).unwrap()).unwrap();
    assert!((class["d_measured"].as_f64().unwrap() - 7.0 / 17.0).abs() < 1e-12);
}

#[test]
fn synthesized_signal_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["fig1", "two-tone", "chirp", "impulse-train"] {
        let out = sst(&["synthesize", name, "-o", path(dir.path())]);
        assert_eq!(code(&out), 0);
        let file = fs::File::open(dir.path().join("signal.csv")).unwrap();
        let read = read_signal_csv(file).unwrap();
        let expect = preset(name).unwrap().synthesize(None, None).unwrap().signal;
        assert_eq!(read, expect, "{name}");
    }
}

#[test]
fn unknown_preset_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = sst(&["synthesize", "nope", "-o", path(dir.path())]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("nope"));
    assert!(stderr(&out).contains("fig1"));
}

#[test]
fn bad_invocations_exit_with_usage_code() {
    assert_eq!(code(&sst(&[])), 2);
    assert_eq!(code(&sst(&["frobnicate"])), 2);
    assert_eq!(code(&sst(&["analyze"])), 2);
    let out = sst(&["config", "--set", "ridge.cnt=2"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("ridge.cnt"));
    let out = sst(&["config", "--set", "cwt.delta=2"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("cwt.delta"));
}

#[test]
fn config_file_with_unknown_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, r#"{"squeeze": {"band_limit": 4, "smoothing": 0.1}}"#).unwrap();
    let out = sst(&["config", "--config", path(&cfg)]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("smoothing"));
}

#[test]
fn dump_prints_the_defaults() {
    let out = sst(&["config", "--dump"]);
    assert_eq!(code(&out), 0);
    let parsed = PipelineConfig::from_json_str(&String::from_utf8_lossy(&out.stdout)).unwrap();
    assert_eq!(parsed, PipelineConfig::default());
    let out = sst(&["config", "--set", "ridge.count=2", "--set", "backend=stft"]);
    let parsed = PipelineConfig::from_json_str(&String::from_utf8_lossy(&out.stdout)).unwrap();
    assert_eq!(parsed.ridge.count, 2);
}

#[test]
fn data_errors_exit_with_code_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = sst(&["analyze", path(&dir.path().join("missing.csv")), "-o", path(dir.path())]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("missing.csv"));
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "time,real\n0,1\n0.1,oops\n0.2,3\n").unwrap();
    let out = sst(&["analyze", path(&bad), "-o", path(dir.path())]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));
}

#[test]
fn zero_signal_analysis_is_empty_but_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("zero.csv");
    let mut text = String::from("time,real\n");
    for n in 0..512 {
        text.push_str(&format!("{},0\n", n as f64 / 64.0));
    }
    fs::write(&input, text).unwrap();
    let out_dir = dir.path().join("out");
    let out = sst(&["analyze", path(&input), "-o", path(&out_dir)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let ridges = fs::read_to_string(out_dir.join("ridges.csv")).unwrap();
    assert_eq!(ridges.trim(), "ridge_id,time,frequency,magnitude");
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest.as_array().unwrap().len(), 0);
    assert!(!out_dir.join("component_0.csv").exists());
}

#[test]
fn analyze_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    for backend in ["cwt", "stft"] {
        let out_dir = dir.path().join(backend);
        let out = sst(&["analyze", "--preset", "two-tone", "-o", path(&out_dir), "--set", &format!("backend={backend}")]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        for name in [
            "config.json",
            "transform.csv",
            "transform.pgm",
            "squeezed.csv",
            "squeezed.pgm",
            "squeeze_report.json",
            "ridges.csv",
            "density.csv",
            "component_0.csv",
            "component_1.csv",
            "manifest.json",
        ] {
            assert!(out_dir.join(name).exists(), "{backend}: {name}");
        }
        let axis = if backend == "cwt" { "scale," } else { "frequency," };
        assert!(fs::read_to_string(out_dir.join("transform.csv")).unwrap().starts_with(axis));

        let pgm = fs::read(out_dir.join("squeezed.pgm")).unwrap();
        let header = String::from_utf8_lossy(&pgm[..20]).into_owned();
        let mut fields = header.split_whitespace();
        assert_eq!(fields.next(), Some("P5"));
        let w: usize = fields.next().unwrap().parse().unwrap();
        let h: usize = fields.next().unwrap().parse().unwrap();
        assert_eq!(fields.next(), Some("255"));
        assert_eq!(w, 1024);
        let prefix = format!("P5\n{w} {h}\n255\n").len();
        assert_eq!(pgm.len(), prefix + w * h);

        let report: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(out_dir.join("squeeze_report.json")).unwrap()).unwrap();
        assert!(report["dropped_fraction"].is_number());
        assert!(report["n_dropped_cells"].is_u64());

        let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
        let entries = manifest.as_array().unwrap();
        assert_eq!(entries.len(), 2);
        for (k, e) in entries.iter().enumerate() {
            assert_eq!(e["component_id"].as_u64(), Some(k as u64));
            assert_eq!(e["band_policy"]["policy"], "adaptive");
            assert!(e["energy_fraction"].as_f64().unwrap() > 0.4);
            assert!(e["overlap_flags"].is_array());
        }
    }
}
