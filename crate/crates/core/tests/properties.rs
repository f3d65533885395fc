//! Invariants checked on random inputs.

use num_complex::Complex64;
use proptest::prelude::*;

use synchrosqueeze::io::{read_signal_csv, write_signal_csv};
use synchrosqueeze::pipeline::{analyze, BackendKind, PipelineConfig};
use synchrosqueeze::ridge::{density_index, extract_ridges, RidgeParams};
use synchrosqueeze::signal::{synthesize, ComponentSpec, SampledSignal};
use synchrosqueeze::squeeze::{phase_transform, synchrosqueeze, SqueezeConfig, Threshold};
use synchrosqueeze::transform::{
    cwt, cwt_with_derivative, default_stft_grid, mstft, mstft_with_derivative, Backend, FrequencyGrid, WaveletSpec,
    WindowSpec,
};

const LEN: usize = 256;
const RATE: f64 = 64.0;

fn complex_signal(len: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| Complex64::new(re, im)), len)
}

fn signal(samples: Vec<Complex64>) -> SampledSignal {
    SampledSignal::new(samples, RATE, 0.0).unwrap()
}

fn max_norm<'a>(it: impl Iterator<Item = &'a Complex64>) -> f64 {
    it.map(|z| z.norm()).fold(0.0, f64::max)
}

fn planes(s: &SampledSignal) -> Vec<ndarray::Array2<Complex64>> {
    let w = WaveletSpec::default();
    let g = WindowSpec::gaussian(0.5).unwrap();
    let grid = FrequencyGrid::arithmetic(0.5, 0.5, 40).unwrap();
    vec![
        cwt(s, &w, 8, (0.05, 0.4)).unwrap().values().clone(),
        mstft(s, &g, &grid).unwrap().values().clone(),
    ]
}

fn check_tone(xi: f64, rel_threshold: f64) -> Result<(), TestCaseError> {
    let s = synthesize(&[ComponentSpec::tone(1.0, xi)], 128.0, 4.0).unwrap();
    let w = WaveletSpec::default();
    let (v, d) = cwt_with_derivative(&s, &w, 16, (0.6 / xi, 1.4 / xi)).unwrap();
    let phase = phase_transform(v.values(), d.values(), rel_threshold * max_norm(v.values().iter())).unwrap();
    for ((idx, &ok), &omega) in phase.valid.indexed_iter().zip(phase.omega.iter()) {
        if ok && !v.coi_mask()[idx] {
            prop_assert!((omega - xi).abs() <= 1e-6 * xi, "cwt omega {omega} for {xi}");
        }
    }
    let g = WindowSpec::gaussian(0.5).unwrap();
    let grid = default_stft_grid(&s).unwrap();
    let (v, d) = mstft_with_derivative(&s, &g, &grid).unwrap();
    let phase = phase_transform(v.values(), d.values(), rel_threshold * v.max_magnitude()).unwrap();
    for ((idx, &ok), &omega) in phase.valid.indexed_iter().zip(phase.omega.iter()) {
        if ok && !v.coi_mask()[idx] {
            prop_assert!((omega - xi).abs() <= 1e-6 * xi, "stft omega {omega} for {xi}");
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn transforms_are_linear(
        f in complex_signal(LEN),
        g in complex_signal(LEN),
        a in (-2.0f64..2.0, -2.0f64..2.0),
        b in (-2.0f64..2.0, -2.0f64..2.0),
    ) {
        let (a, b) = (Complex64::new(a.0, a.1), Complex64::new(b.0, b.1));
        let mix: Vec<Complex64> = f.iter().zip(&g).map(|(x, y)| a * x + b * y).collect();
        let pf = planes(&signal(f));
        let pg = planes(&signal(g));
        let pm = planes(&signal(mix));
        for ((x, y), m) in pf.iter().zip(&pg).zip(&pm) {
            let expect = x.mapv(|v| a * v) + y.mapv(|v| b * v);
            let scale = max_norm(expect.iter()).max(1.0);
            let diff = max_norm((&expect - m).iter());
            prop_assert!(diff <= 1e-10 * scale, "difference {diff}");
        }
    }

    #[test]
    fn circular_shift_commutes_with_transforms(f in complex_signal(LEN), shift in 1usize..LEN) {
        let mut shifted = f.clone();
        shifted.rotate_right(shift);
        let base = planes(&signal(f));
        let moved = planes(&signal(shifted));
        for (p, q) in base.iter().zip(&moved) {
            let scale = max_norm(p.iter()).max(1e-12);
            for r in 0..p.nrows() {
                for n in 0..LEN {
                    let d = (q[[r, (n + shift) % LEN]] - p[[r, n]]).norm();
                    prop_assert!(d <= 1e-10 * scale, "row {r} column {n}: {d}");
                }
            }
        }
    }

    #[test]
    fn squeeze_conserves_column_mass(f in complex_signal(LEN), rel in 0.0f64..0.2) {
        let s = signal(f);
        let config = SqueezeConfig {
            threshold: Threshold::Relative(rel),
            ..SqueezeConfig::default()
        };
        let w = WaveletSpec::default();
        let (v, d) = cwt_with_derivative(&s, &w, 16, (1.25 / 32.0, 0.5)).unwrap();
        let a = synchrosqueeze(v, d, Backend::Cwt(w), &config).unwrap();
        let grid = a.squeezed.plane.grid();
        for n in 0..LEN {
            let mut expected = Complex64::new(0.0, 0.0);
            let mut scale = 0.0;
            for (j, &scale_j) in a.plane.scales().iter().enumerate() {
                let z = a.plane.values()[[j, n]];
                let omega = a.phase.omega[[j, n]];
                if a.phase.valid[[j, n]] && z.norm() > a.squeezed.threshold && omega > 0.0 && grid.locate(omega).is_some() {
                    let mass = z * scale_j.powf(-1.5) * a.plane.scale_step(j);
                    expected += mass;
                    scale += mass.norm();
                }
            }
            let got: Complex64 = (0..grid.len()).map(|m| a.squeezed.plane.values()[[m, n]] * grid.width(m)).sum();
            prop_assert!((got - expected).norm() <= 1e-10 * scale.max(1e-300));
        }
    }

    /// Tones periodic over the transform length see no boundary leakage, so
    /// the estimate is exact on every interior cell above a tiny threshold.
    #[test]
    fn periodic_tone_phase_transform_is_exact(k in 12u32..100) {
        let xi = 0.25 * k as f64;
        check_tone(xi, 1e-6)?;
    }

    #[test]
    fn density_index_ignores_amplitude_scale(c in 0.01f64..100.0, stft in any::<bool>()) {
        let s = synthesize(&[ComponentSpec::tone(1.0, 5.0), ComponentSpec::linear_chirp(0.7, 10.0, 0.5)], 64.0, 8.0).unwrap();
        let scaled = s.with_samples(s.samples().iter().map(|z| z * c).collect()).unwrap();
        let config = PipelineConfig {
            backend: if stft { BackendKind::Stft } else { BackendKind::Cwt },
            ..PipelineConfig::default()
        };
        let a = analyze(&s, &config).unwrap();
        let b = analyze(&scaled, &config).unwrap();
        prop_assert_eq!(&a.density, &b.density);
    }

    #[test]
    fn csv_round_trip_is_exact(
        f in prop::collection::vec((-1e6f64..1e6, -1e6f64..1e6), 2..64),
        rate in prop::sample::select(vec![1.0, 3.0, 44.1, 100.0, 128.0, 1000.0 / 3.0]),
        real in any::<bool>(),
    ) {
        let samples = f.iter().map(|&(re, im)| Complex64::new(re, if real { 0.0 } else { im })).collect();
        let s = SampledSignal::new(samples, rate, 0.0).unwrap();
        let mut buf = Vec::new();
        write_signal_csv(&mut buf, &s).unwrap();
        let back = read_signal_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(back.samples(), s.samples());
        prop_assert_eq!(back.sample_rate(), s.sample_rate());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    /// Raising the jump penalty never makes the first ridge jumpier.
    #[test]
    fn penalty_monotonicity(seed in 0u64..1000) {
        let s = synthesize(&[ComponentSpec::fig1()], 100.0, 10.0).unwrap().real_part();
        let noisy = synchrosqueeze::signal::add_white_noise(&s, 0.05, seed).unwrap();
        let config = PipelineConfig::default();
        let out = analyze(&noisy, &config).unwrap();
        let plane = &out.squeezed.plane;
        let mut last = f64::INFINITY;
        for lambda in [0.0, 1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0] {
            let params = RidgeParams { count: 1, penalty: Some(lambda), ..RidgeParams::default() }.without_truncation();
            let set = extract_ridges(plane, &params).unwrap();
            let jumps = set.ridges[0].squared_jumps();
            prop_assert!(jumps <= last * (1.0 + 1e-12), "lambda {lambda}: {jumps} > {last}");
            last = jumps;
        }
        prop_assert_eq!(density_index(&out.ridges).len(), plane.times().len());
    }
}
