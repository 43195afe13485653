//! Frame-level checks that cross module boundaries: 2-D tensor roundtrip,
//! reconstruction boundedness on random sparse coefficients, and stability
//! of the norm-equivalence interval.

use num_complex::Complex64;

use alphamod::bapu::Bapu;
use alphamod::brushlet::{
    analyze, frame_norm_equivalence_report, roundtrip_error, sequence_norm, synthesize, Bell,
    BrushletFrame, CoeffArray, CoeffKey,
};
use alphamod::covering::build_ball_covering_default;
use alphamod::indices::{Exponent, SpaceParams};
use alphamod::signal::{
    alpha_modulation_norm, fft_forward, make_test_signal, GridSpec, NormRoute, TestSignalKind,
};

#[test]
fn tensor_roundtrip_2d() {
    let g = GridSpec::new(2, 128, 8.0).unwrap();
    let frame =
        BrushletFrame::build(&g, 0.0, 4.0, 12.0, 8.0, Bell::new(0.25).unwrap()).unwrap();
    let f = fft_forward(&make_test_signal(
        &TestSignalKind::RandomBandlimited { seed: 31, band_radius: 6.0 },
        &g,
    ));
    let err = roundtrip_error(&frame, &f).unwrap();
    assert!(err < 1e-9, "2-D roundtrip error {err}");
}

#[test]
fn reconstruction_bounded_on_sparse_coefficients() {
    let g = GridSpec::new(1, 1 << 12, 40.0).unwrap();
    let frame =
        BrushletFrame::build(&g, 0.5, 4.0, 60.0, 40.0, Bell::new(0.25).unwrap()).unwrap();
    let cov = build_ball_covering_default(1, 0.5, 60.0).unwrap();
    let bapu = Bapu::build(&cov, &g).unwrap();
    let params = SpaceParams::new(0.5, Exponent::two(), Exponent::two(), 0.0).unwrap();
    let ids = frame.cube_ids();
    let mut ratios = Vec::new();
    for seed in 0..5u64 {
        // sparse deterministic coefficients over a few cubes and indices
        let mut c = CoeffArray { d: 1, entries: Default::default() };
        let mut h = seed.wrapping_mul(0x9E3779B97F4A7C15) | 1;
        for _ in 0..12 {
            h ^= h << 13;
            h ^= h >> 7;
            h ^= h << 17;
            let cube = &ids[(h as usize >> 3) % ids.len()];
            let k = match cube {
                alphamod::covering::PatchId::Lattice(k) => k.clone(),
                _ => continue,
            };
            let m = frame.atoms_per_axis(&k).unwrap();
            let n = [(h as usize >> 17) % m.min(40) as usize, 0];
            let val = Complex64::new(((h >> 5) & 0xff) as f64 / 128.0 - 1.0, 0.3);
            c.entries.insert(CoeffKey { k, n: [n[0] as u32, 0] }, val);
        }
        if c.entries.is_empty() {
            continue;
        }
        let rebuilt = synthesize(&c, &frame).unwrap();
        let (m_norm, _) =
            alpha_modulation_norm(&fft_forward(&rebuilt), &bapu, &params, NormRoute::LocalSlice)
                .unwrap();
        let seq = sequence_norm(&c, &params).unwrap();
        ratios.push(m_norm / seq);
    }
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(0.0f64, f64::max);
    assert!(hi.is_finite() && lo > 0.0, "reconstruction ratios degenerate");
    assert!(hi / lo < 20.0, "‖Rc‖_M/‖c‖_m spread {}", hi / lo);
}

#[test]
fn equivalence_interval_stable_under_doubling() {
    let g = GridSpec::new(1, 1 << 12, 40.0).unwrap();
    let g2 = g.doubled();
    let bell = Bell::new(0.25).unwrap();
    let frame = BrushletFrame::build(&g, 0.5, 4.0, 60.0, 40.0, bell).unwrap();
    let frame2 = BrushletFrame::build(&g2, 0.5, 4.0, 60.0, 40.0, bell).unwrap();
    let cov = build_ball_covering_default(1, 0.5, 60.0).unwrap();
    let bapu = Bapu::build(&cov, &g).unwrap();
    let bapu2 = Bapu::build(&cov, &g2).unwrap();
    let params = SpaceParams::new(0.5, Exponent::two(), Exponent::two(), 0.0).unwrap();
    let mut sig1 = Vec::new();
    let mut sig2 = Vec::new();
    for seed in 0..8 {
        let kind = TestSignalKind::RandomBandlimited { seed: 500 + seed, band_radius: 36.0 };
        sig1.push(fft_forward(&make_test_signal(&kind, &g)));
        sig2.push(fft_forward(&make_test_signal(&kind, &g2)));
    }
    let eq1 =
        frame_norm_equivalence_report(&frame, &bapu, &sig1, &params, NormRoute::GlobalFft).unwrap();
    let eq2 =
        frame_norm_equivalence_report(&frame2, &bapu2, &sig2, &params, NormRoute::GlobalFft)
            .unwrap();
    let drift = ((eq1.min_ratio - eq2.min_ratio).abs() / eq1.min_ratio)
        .max((eq1.max_ratio - eq2.max_ratio).abs() / eq1.max_ratio);
    assert!(drift <= 0.1, "equivalence interval drift {drift}");
}

#[test]
fn analyze_synthesize_are_linear() {
    let g = GridSpec::new(1, 1 << 11, 20.0).unwrap();
    let frame =
        BrushletFrame::build(&g, 0.0, 4.0, 40.0, 25.0, Bell::new(0.25).unwrap()).unwrap();
    let a = fft_forward(&make_test_signal(
        &TestSignalKind::RandomBandlimited { seed: 1, band_radius: 20.0 },
        &g,
    ));
    let ca = analyze(&a, &frame).unwrap();
    let mut doubled = ca.clone();
    for v in doubled.entries.values_mut() {
        *v *= 2.0;
    }
    let ra = synthesize(&ca, &frame).unwrap();
    let rb = synthesize(&doubled, &frame).unwrap();
    for (x, y) in ra.samples.iter().zip(&rb.samples) {
        assert!((*x * 2.0 - *y).norm() < 1e-12);
    }
}
