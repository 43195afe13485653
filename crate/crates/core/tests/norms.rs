//! Cross-module checks of the decomposition norms: the plateau isolation
//! identity, the L²-scale equivalence with the Sobolev norm, and the
//! norm invariants (weight monotonicity, ξ_Q robustness, piece Parseval
//! bounds, grid-refinement consistency).

use num_complex::Complex64;

use alphamod::bapu::{certify_partition, plateau_profile, Bapu};
use alphamod::covering::{
    build_ball_covering, build_ball_covering_default, build_metric_covering,
};
use alphamod::indices::{Exponent, SpaceParams};
use alphamod::signal::{
    alpha_modulation_norm, fft_forward, fft_inverse, lp_norm, make_test_signal, multiplier_apply,
    sobolev_norm, GridSpec, NormRoute, Signal, SpectralSignal, TestSignalKind,
};

fn grid1(n: usize, l: f64) -> GridSpec {
    GridSpec::new(1, n, l).unwrap()
}

fn random_spec(grid: &GridSpec, seed: u64, band: f64) -> SpectralSignal {
    fft_forward(&make_test_signal(
        &TestSignalKind::RandomBandlimited { seed, band_radius: band },
        grid,
    ))
}

#[test]
fn plateau_bump_norm_is_exact() {
    let g = grid1(1 << 13, 32.0);
    let cov = build_metric_covering(1, 0.5, 0.5, 120.0).unwrap();
    let bapu = Bapu::build(&cov, &g).unwrap();
    let center = 80.0f64;
    let ext = bapu.adjoin_plateau(&[vec![center]]).unwrap();
    assert!(certify_partition(&ext).max_sum_error <= 1e-8);

    // f̂ = a bump strictly inside the adjoined quarter ball
    let scale = (1.0 + center * center).sqrt().powf(0.5);
    let r = cov.r();
    let mut f = SpectralSignal::zero(g);
    for m in 0..g.len() {
        let xi = g.axis_xi(m);
        let t = (xi - center).abs() / scale;
        if t < r / 8.0 {
            f.coeffs[m] = Complex64::new(plateau_profile(t, r / 16.0, r / 8.0), 0.0);
        }
    }
    let s = 1.5;
    for p in [Exponent::one(), Exponent::two(), Exponent::from_int(4).unwrap()] {
        let params = SpaceParams::new(0.5, p, Exponent::from_ratio(7, 3).unwrap(), s).unwrap();
        let (norm, pieces) = alpha_modulation_norm(&f, &ext, &params, NormRoute::GlobalFft).unwrap();
        let expect = (1.0 + center * center).powf(0.5 * s) * lp_norm(&fft_inverse(&f), p);
        assert!(
            (norm - expect).abs() <= 1e-8 * expect,
            "p = {p}: norm {norm} vs ⟨ξ⟩^s·Lp {expect}"
        );
        // only the plateau window contributes
        let live = pieces.entries.iter().filter(|e| e.2 > 0.0).count();
        assert_eq!(live, 1, "exactly one live piece");
    }
}

#[test]
fn l2_scale_matches_sobolev() {
    let g = grid1(1 << 12, 50.0);
    let t = 60.0;
    let band = 40.0;
    let p2 = Exponent::two();
    for (alpha, cov) in [
        (0.0, build_ball_covering_default(1, 0.0, t).unwrap()),
        (0.5, build_ball_covering_default(1, 0.5, t).unwrap()),
        (1.0, build_metric_covering(1, 1.0, 0.5, t).unwrap()),
    ] {
        let bapu = Bapu::build(&cov, &g).unwrap();
        for s in [-1.0, 0.0, 2.0] {
            let params = SpaceParams::new(alpha, p2, p2, s).unwrap();
            let mut ratios = Vec::new();
            for seed in 0..12 {
                let f = random_spec(&g, 900 + seed, band);
                let (norm, _) =
                    alpha_modulation_norm(&f, &bapu, &params, NormRoute::LocalSlice).unwrap();
                ratios.push(norm / sobolev_norm(&f, s));
            }
            let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = ratios.iter().copied().fold(0.0f64, f64::max);
            assert!(
                hi / lo <= 10.0,
                "alpha {alpha} s {s}: ratio interval [{lo}, {hi}] too wide"
            );
        }
    }
}

#[test]
fn weight_monotonicity() {
    let g = grid1(1 << 12, 50.0);
    let cov = build_ball_covering_default(1, 0.5, 60.0).unwrap();
    let bapu = Bapu::build(&cov, &g).unwrap();
    let f = random_spec(&g, 3, 40.0);
    let p = Exponent::from_int(3).unwrap();
    let q = Exponent::from_ratio(3, 2).unwrap();
    let mut prev = 0.0;
    for s in [-2.0, -0.5, 0.0, 1.0, 2.5] {
        let params = SpaceParams::new(0.5, p, q, s).unwrap();
        let (norm, _) = alpha_modulation_norm(&f, &bapu, &params, NormRoute::LocalSlice).unwrap();
        assert!(norm >= prev, "norm must grow with the weight exponent");
        prev = norm;
    }
}

#[test]
fn xi_choice_robustness() {
    let g = grid1(1 << 12, 50.0);
    let cov = build_ball_covering_default(1, 0.5, 60.0).unwrap();
    let bapu = Bapu::build(&cov, &g).unwrap();
    let params = SpaceParams::new(0.5, Exponent::two(), Exponent::one(), 1.0).unwrap();
    // same windows, ξ_Q resampled inside each patch
    let cov_rand = cov.with_random_xi(7);
    let bapu_rand = Bapu::build(&cov_rand, &g).unwrap();
    let mut worst: f64 = 1.0;
    for seed in 0..8 {
        let f = random_spec(&g, 40 + seed, 40.0);
        let (a, _) = alpha_modulation_norm(&f, &bapu, &params, NormRoute::LocalSlice).unwrap();
        let (b, _) = alpha_modulation_norm(&f, &bapu_rand, &params, NormRoute::LocalSlice).unwrap();
        worst = worst.max((a / b).max(b / a));
    }
    assert!(worst < 3.0, "ξ_Q choice changed the norm by {worst}");
    // the equivalence constant is grid-stable
    let g2 = g.doubled();
    let bapu_2 = Bapu::build(&cov, &g2).unwrap();
    let bapu_rand2 = Bapu::build(&cov_rand, &g2).unwrap();
    let mut worst2: f64 = 1.0;
    for seed in 0..8 {
        let f = random_spec(&g2, 40 + seed, 40.0);
        let (a, _) = alpha_modulation_norm(&f, &bapu_2, &params, NormRoute::LocalSlice).unwrap();
        let (b, _) = alpha_modulation_norm(&f, &bapu_rand2, &params, NormRoute::LocalSlice).unwrap();
        worst2 = worst2.max((a / b).max(b / a));
    }
    assert!(
        (worst2 - worst).abs() / worst <= 0.1,
        "robustness constant drifted: {worst} vs {worst2}"
    );
}

#[test]
fn piece_parseval_bounds() {
    let g = grid1(1 << 12, 50.0);
    let cov = build_ball_covering_default(1, 0.5, 60.0).unwrap();
    let bapu = Bapu::build(&cov, &g).unwrap();
    let n0 = cov.certificate().n0 as f64;
    let rep = certify_partition(&bapu);
    for seed in 0..6 {
        let f = random_spec(&g, 70 + seed, 40.0);
        let total: f64 = f
            .coeffs
            .iter()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            * g.spectral_cell();
        let mut pieces = 0.0;
        for w in bapu.windows() {
            let piece = multiplier_apply(w, &f);
            let l2 = lp_norm(&piece, Exponent::two());
            pieces += l2 * l2;
        }
        assert!(
            pieces >= rep.min_square_sum * total * 0.999,
            "piece energy {pieces} below the square-sum floor"
        );
        assert!(pieces <= n0 * total * 1.001, "piece energy {pieces} above n0·‖f‖²");
    }
}

#[test]
fn bapu_pieces_recombine() {
    let g = grid1(1 << 12, 50.0);
    let cov = build_ball_covering_default(1, 0.5, 60.0).unwrap();
    let bapu = Bapu::build(&cov, &g).unwrap();
    let f = random_spec(&g, 11, 40.0);
    let orig = fft_inverse(&f);
    let mut sum = Signal::zero(g);
    for w in bapu.windows() {
        let piece = multiplier_apply(w, &f);
        for (a, b) in sum.samples.iter_mut().zip(&piece.samples) {
            *a += b;
        }
    }
    let num: f64 = sum
        .samples
        .iter()
        .zip(&orig.samples)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let den = lp_norm(&orig, Exponent::two());
    assert!(num / den <= 1e-10, "recombination error {}", num / den);

    // a window that is 1 on the spectrum reproduces f; a disjoint one kills it
    let mut fnarrow = SpectralSignal::zero(g);
    for m in 0..g.len() {
        let xi = g.axis_xi(m);
        if (xi - 9.0).abs() < 0.4 {
            fnarrow.coeffs[m] = Complex64::new(1.0, 0.0);
        }
    }
    let w9 = bapu
        .windows()
        .iter()
        .find(|w| (w.xi_abs - 9.0).abs() < 1e-9)
        .expect("patch at ξ = 9 (k = 3)");
    let mut all_one = w9.clone();
    for v in all_one.values.iter_mut() {
        *v = 1.0;
    }
    let repl = multiplier_apply(&all_one, &fnarrow);
    let orig_narrow = fft_inverse(&fnarrow);
    let err: f64 = repl
        .samples
        .iter()
        .zip(&orig_narrow.samples)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    assert!(err <= 1e-12 * lp_norm(&orig_narrow, Exponent::two()) + 1e-14);
    let far = bapu
        .windows()
        .iter()
        .find(|w| w.xi_abs > 30.0)
        .unwrap();
    let dead = multiplier_apply(far, &fnarrow);
    assert_eq!(lp_norm(&dead, Exponent::infinity()), 0.0);
}

#[test]
fn grid_refinement_consistency() {
    let g = grid1(1 << 12, 50.0);
    let g2 = g.doubled();
    let cov = build_ball_covering_default(1, 0.5, 60.0).unwrap();
    let bapu = Bapu::build(&cov, &g).unwrap();
    let bapu2 = Bapu::build(&cov, &g2).unwrap();
    let kind = TestSignalKind::RandomBandlimited { seed: 5, band_radius: 40.0 };
    let f = fft_forward(&make_test_signal(&kind, &g));
    let f2 = fft_forward(&make_test_signal(&kind, &g2));
    for (p, q) in [
        (Exponent::one(), Exponent::two()),
        (Exponent::two(), Exponent::two()),
        (Exponent::from_int(4).unwrap(), Exponent::infinity()),
        (Exponent::infinity(), Exponent::one()),
    ] {
        let params = SpaceParams::new(0.5, p, q, 1.0).unwrap();
        // the slice route is n-independent by construction
        let (a, _) = alpha_modulation_norm(&f, &bapu, &params, NormRoute::LocalSlice).unwrap();
        let (b, _) = alpha_modulation_norm(&f2, &bapu2, &params, NormRoute::LocalSlice).unwrap();
        assert!(
            (a - b).abs() / a < 1e-6,
            "local route drifted under doubling: {a} vs {b} at ({p},{q})"
        );
    }
    // the reference route agrees with the slice route
    for p in [Exponent::one(), Exponent::two(), Exponent::from_int(4).unwrap()] {
        let params = SpaceParams::new(0.5, p, Exponent::two(), 0.0).unwrap();
        let (a, _) = alpha_modulation_norm(&f, &bapu, &params, NormRoute::LocalSlice).unwrap();
        let (b, _) = alpha_modulation_norm(&f, &bapu, &params, NormRoute::GlobalFft).unwrap();
        assert!(
            (a - b).abs() / a < 1e-5,
            "routes disagree at p = {p}: {a} vs {b}"
        );
    }
}

#[test]
fn norm_2d_sanity() {
    let g = GridSpec::new(2, 128, 10.0).unwrap();
    let cov = build_ball_covering(2, 0.0, 2.0 * 2.0f64.sqrt(), 12.0).unwrap();
    let bapu = Bapu::build(&cov, &g).unwrap();
    let f = random_spec(&g, 21, 8.0);
    let params = SpaceParams::new(0.0, Exponent::two(), Exponent::two(), 0.0).unwrap();
    let (local, _) = alpha_modulation_norm(&f, &bapu, &params, NormRoute::LocalSlice).unwrap();
    let (global, _) = alpha_modulation_norm(&f, &bapu, &params, NormRoute::GlobalFft).unwrap();
    assert!((local - global).abs() / global < 1e-6);
    let l2 = f.mass().sqrt();
    let ratio = local / l2;
    assert!(ratio > 0.2 && ratio < 3.0, "2-D piece energy ratio {ratio}");
}
