//! Command-line frontend: builds coverings, evaluates norms, and runs the
//! embedding / sharpness / frame experiments from JSON configs with flag
//! overrides. Identical config + seed produces byte-identical artifacts;
//! progress goes to stderr only.
//!
//! Exit codes: 0 = pass, 1 = experiment or certification failure,
//! 2 = usage/config error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use alphamod::bapu::Bapu;
use alphamod::covering::{
    build_ball_covering, build_ball_covering_default, build_cube_covering,
    build_dyadic_covering, build_metric_covering, Covering,
};
use alphamod::error::Error;
use alphamod::experiments::{
    embed_csv_row, growth_csv_rows, sharpness_threshold, EmbedHarness, EmbedHarnessConfig,
    EmbeddingCase, SharpnessConfig, EMBED_CSV_HEADER, GROWTH_CSV_HEADER,
};
use alphamod::indices::{Exponent, SpaceParams};
use alphamod::signal::{
    alpha_modulation_norm, fft_forward, make_test_signal, norm_csv_row, sobolev_norm, GridSpec,
    NormRoute, TestSignalKind, NORM_CSV_HEADER,
};

#[derive(Parser)]
#[command(name = "alphamod", version, about = "frequency-space decomposition toolkit")]
struct Cli {
    /// Cap the worker thread count (also via ALPHAMOD_THREADS)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build and certify a covering, writing its JSON artifact
    Covering(CoveringArgs),
    /// Compute decomposition/Sobolev norms of a test signal into a CSV
    Norm(NormArgs),
    /// Run the two-sided embedding verification over an exponent grid
    Embed(RunArgs),
    /// Run the extremal-family growth (sharpness) experiment
    Sharpness(RunArgs),
    /// Build the brushlet frame, check the roundtrip and norm equivalence
    Frame(RunArgs),
}

#[derive(Args)]
struct CoveringArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long = "dim", short = 'd', default_value_t = 1)]
    dim: usize,
    #[arg(long, default_value = "ball")]
    family: String,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    trunc: f64,
    #[arg(long, short = 'o')]
    out: PathBuf,
}

#[derive(Args)]
struct NormArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return 2;
        }
    };
    let threads = cli.threads.or_else(|| {
        std::env::var("ALPHAMOD_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = threads {
        alphamod::configure_threads(n);
    }
    let outcome = match cli.command {
        Command::Covering(a) => cmd_covering(&a),
        Command::Norm(a) => cmd_norm(&a),
        Command::Embed(a) => cmd_embed(&a),
        Command::Sharpness(a) => cmd_sharpness(&a),
        Command::Frame(a) => cmd_frame(&a),
    };
    match outcome {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidParameter(_) | Error::Json(_) => 2,
        _ => 1,
    }
}

fn load_config<C: serde::de::DeserializeOwned + Default>(
    path: &Option<PathBuf>,
) -> Result<C, Error> {
    match path {
        None => Ok(C::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            Ok(serde_json::from_str(&text)?)
        }
    }
}

// =====================================================
// covering
// =====================================================

fn cmd_covering(a: &CoveringArgs) -> Result<bool, Error> {
    let cov: Covering = match a.family.as_str() {
        "ball" => match a.r {
            Some(r) => build_ball_covering(a.dim, a.alpha, r, a.trunc)?,
            None => build_ball_covering_default(a.dim, a.alpha, a.trunc)?,
        },
        "cube" => build_cube_covering(
            a.dim,
            a.alpha,
            a.r.unwrap_or(2.0 * (a.dim as f64).sqrt()),
            a.trunc,
        )?,
        "dyadic" => build_dyadic_covering(a.dim, a.trunc)?,
        "metric" => build_metric_covering(a.dim, a.alpha, a.r.unwrap_or(0.5), a.trunc)?,
        other => {
            return Err(Error::invalid(format!(
                "unknown family {other:?} (ball|cube|dyadic|metric)"
            )))
        }
    };
    cov.write_json(&a.out)?;
    eprintln!(
        "covering: {} patches, n0 = {}, K = {:.4}, spread = {:.4} -> {}",
        cov.patches().len(),
        cov.certificate().n0,
        cov.certificate().k_ratio,
        cov.certificate().mu_spread,
        a.out.display()
    );
    Ok(true)
}

// =====================================================
// norm
// =====================================================

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NormConfig {
    alpha: f64,
    p: Exponent,
    q: Exponent,
    s: f64,
    family: String,
    r: Option<f64>,
    trunc: f64,
    grid_n: usize,
    grid_l: f64,
    dim: usize,
    signal: TestSignalKind,
    signal_id: String,
    csv: PathBuf,
    sobolev: bool,
}

impl Default for NormConfig {
    fn default() -> Self {
        NormConfig {
            alpha: 0.0,
            p: Exponent::two(),
            q: Exponent::two(),
            s: 0.0,
            family: "ball".into(),
            r: None,
            trunc: 60.0,
            grid_n: 1 << 12,
            grid_l: 20.0,
            dim: 1,
            signal: TestSignalKind::Gaussian { sigma: 1.0, center: 0.0, modulation: 0.0 },
            signal_id: "gaussian".into(),
            csv: PathBuf::from("norms.csv"),
            sobolev: false,
        }
    }
}

fn covering_for(cfg: &NormConfig) -> Result<Covering, Error> {
    match cfg.family.as_str() {
        "ball" => match cfg.r {
            Some(r) => build_ball_covering(cfg.dim, cfg.alpha, r, cfg.trunc),
            None => build_ball_covering_default(cfg.dim, cfg.alpha, cfg.trunc),
        },
        "dyadic" => build_dyadic_covering(cfg.dim, cfg.trunc),
        "metric" => build_metric_covering(cfg.dim, cfg.alpha, cfg.r.unwrap_or(0.5), cfg.trunc),
        other => Err(Error::invalid(format!("unknown family {other:?}"))),
    }
}

fn cmd_norm(a: &NormArgs) -> Result<bool, Error> {
    let mut cfg: NormConfig = load_config(&a.config)?;
    if let Some(csv) = &a.csv {
        cfg.csv = csv.clone();
    }
    if let Some(seed) = a.seed {
        if let TestSignalKind::RandomBandlimited { seed: s, .. } = &mut cfg.signal {
            *s = seed;
        }
    }
    let grid = GridSpec::new(cfg.dim, cfg.grid_n, cfg.grid_l)?;
    let cov = covering_for(&cfg)?;
    let bapu = Bapu::build(&cov, &grid)?;
    let f = fft_forward(&make_test_signal(&cfg.signal, &grid));
    let params = SpaceParams::new(cfg.alpha, cfg.p, cfg.q, cfg.s)?;
    let (norm, pieces) = alpha_modulation_norm(&f, &bapu, &params, NormRoute::LocalSlice)?;
    let mut rows = String::new();
    if !cfg.csv.exists() {
        rows.push_str(NORM_CSV_HEADER);
        rows.push('\n');
    }
    rows.push_str(&norm_csv_row(&params, &grid, &cfg.signal_id, norm, pieces.entries.len()));
    rows.push('\n');
    if cfg.sobolev {
        let h = sobolev_norm(&f, cfg.s);
        rows.push_str(&format!(
            "sobolev,{},{},{}x{}@{},{},{},0\n",
            cfg.s, cfg.s, grid.d, grid.n, grid.half_width, cfg.signal_id, h
        ));
    }
    append(&cfg.csv, &rows)?;
    eprintln!("norm = {norm} ({} pieces) -> {}", pieces.entries.len(), cfg.csv.display());
    Ok(true)
}

fn append(path: &Path, text: &str) -> Result<(), Error> {
    use std::io::Write;
    let mut f = std::fs::OpenOptions::new().create(true).append(true).open(path)?;
    f.write_all(text.as_bytes())?;
    Ok(())
}

// =====================================================
// embed
// =====================================================

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EmbedConfig {
    dim: usize,
    grid_n: usize,
    grid_l: f64,
    trunc: f64,
    band: f64,
    alpha_pairs: Vec<(f64, f64)>,
    s_list: Vec<f64>,
    exponents: Vec<Exponent>,
    n_signals: usize,
    seed: u64,
    metric_r: f64,
    stability_tol: f64,
    global_route: bool,
}

impl Default for EmbedConfig {
    fn default() -> Self {
        EmbedConfig {
            dim: 1,
            grid_n: 1 << 13,
            grid_l: 30.0,
            trunc: 120.0,
            band: 50.0,
            alpha_pairs: vec![(0.0, 0.5), (0.0, 1.0), (0.5, 1.0)],
            s_list: vec![0.0, 1.0],
            exponents: vec![
                Exponent::one(),
                Exponent::two(),
                Exponent::from_int(4).unwrap(),
                Exponent::from_int(8).unwrap(),
                Exponent::infinity(),
            ],
            n_signals: 6,
            seed: 2024,
            metric_r: 0.75,
            stability_tol: 0.1,
            global_route: true,
        }
    }
}

#[derive(Serialize)]
struct EmbedSummary {
    n_cases: usize,
    n_stable: usize,
    all_stable: bool,
    worst_drift: f64,
}

fn cmd_embed(a: &RunArgs) -> Result<bool, Error> {
    let mut cfg: EmbedConfig = load_config(&a.config)?;
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    std::fs::create_dir_all(&a.out)?;
    let mut alphas: Vec<f64> = cfg
        .alpha_pairs
        .iter()
        .flat_map(|&(a1, a2)| [a1, a2])
        .collect();
    alphas.sort_by(|x, y| x.partial_cmp(y).unwrap());
    alphas.dedup();
    let hcfg = EmbedHarnessConfig {
        grid: GridSpec::new(cfg.dim, cfg.grid_n, cfg.grid_l)?,
        trunc: cfg.trunc,
        band: cfg.band,
        alphas,
        n_signals: cfg.n_signals,
        seed: cfg.seed,
        ps: cfg.exponents.clone(),
        route: if cfg.global_route { NormRoute::GlobalFft } else { NormRoute::LocalSlice },
        metric_r: cfg.metric_r,
        check_grid_doubling: true,
    };
    let mut harness = EmbedHarness::new(hcfg)?;
    let mut csv = String::from(EMBED_CSV_HEADER);
    csv.push('\n');
    let mut n_cases = 0;
    let mut n_stable = 0;
    let mut worst_drift = 0.0f64;
    for &(alpha1, alpha2) in &cfg.alpha_pairs {
        for &s in &cfg.s_list {
            for &p in &cfg.exponents {
                for &q in &cfg.exponents {
                    let case = EmbeddingCase { d: cfg.dim, alpha1, alpha2, p, q, s };
                    let report = harness.verify_embedding(&case)?;
                    n_cases += 1;
                    if report.stable_within(cfg.stability_tol) {
                        n_stable += 1;
                    }
                    worst_drift = worst_drift.max(report.drift_upper).max(report.drift_lower);
                    csv.push_str(&embed_csv_row(&report));
                    csv.push('\n');
                }
            }
        }
    }
    std::fs::write(a.out.join("embed.csv"), &csv)?;
    let summary = EmbedSummary {
        n_cases,
        n_stable,
        all_stable: n_stable == n_cases,
        worst_drift,
    };
    std::fs::write(
        a.out.join("summary.json"),
        serde_json::to_string_pretty(&summary)?,
    )?;
    eprintln!("embed: {n_stable}/{n_cases} stable, worst drift {worst_drift:.4}");
    Ok(summary.all_stable)
}

// =====================================================
// sharpness
// =====================================================

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SharpnessCase {
    p: Exponent,
    q: Exponent,
    /// offset of the α₂-side weight above the sharpness threshold
    t_above: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SharpnessCliConfig {
    dim: usize,
    grid_n: usize,
    grid_l: f64,
    trunc: f64,
    alpha1: f64,
    alpha2: f64,
    s: f64,
    eps: f64,
    xi_start: f64,
    metric_r: f64,
    n_list: Vec<usize>,
    cases: Vec<SharpnessCase>,
}

impl Default for SharpnessCliConfig {
    fn default() -> Self {
        SharpnessCliConfig {
            dim: 1,
            grid_n: 1 << 16,
            grid_l: 150.0,
            trunc: 350.0,
            alpha1: 0.0,
            alpha2: 0.5,
            s: 0.0,
            eps: 0.25,
            xi_start: 0.5,
            metric_r: 0.5,
            n_list: vec![4, 8, 16, 32, 64],
            cases: vec![
                SharpnessCase { p: Exponent::two(), q: Exponent::two(), t_above: 0.25 },
                SharpnessCase { p: Exponent::two(), q: Exponent::two(), t_above: 0.0 },
            ],
        }
    }
}

#[derive(Serialize)]
struct SharpnessSummary {
    rows: Vec<SharpnessVerdict>,
    all_pass: bool,
}

#[derive(Serialize)]
struct SharpnessVerdict {
    p: Exponent,
    q: Exponent,
    t: f64,
    threshold: f64,
    above: bool,
    growth_factor: f64,
    band_ratio: f64,
    pass: bool,
}

fn cmd_sharpness(a: &RunArgs) -> Result<bool, Error> {
    let cfg: SharpnessCliConfig = load_config(&a.config)?;
    std::fs::create_dir_all(&a.out)?;
    let grid = GridSpec::new(cfg.dim, cfg.grid_n, cfg.grid_l)?;
    let mut csv = String::from(GROWTH_CSV_HEADER);
    csv.push('\n');
    let mut rows = Vec::new();
    for case in &cfg.cases {
        let mut scfg = SharpnessConfig {
            d: cfg.dim,
            alpha1: cfg.alpha1,
            alpha2: cfg.alpha2,
            p: case.p,
            q: case.q,
            s: cfg.s,
            t: 0.0,
            n_list: cfg.n_list.clone(),
            eps: cfg.eps,
            grid,
            trunc: cfg.trunc,
            xi_start: cfg.xi_start,
            metric_r: cfg.metric_r,
            route: NormRoute::LocalSlice,
        };
        let threshold = sharpness_threshold(&scfg)?;
        scfg.t = threshold + case.t_above;
        let table = alphamod::experiments::sharpness_growth(&scfg)?;
        csv.push_str(&growth_csv_rows(&scfg, &table));
        let above = case.t_above > 0.0;
        let pass = if above {
            table.growth_factor >= 2.0
        } else {
            table.band_ratio <= 2.0
        };
        eprintln!(
            "sharpness ({}, {}) t = {}: growth {:.3}, band {:.3} -> {}",
            case.p,
            case.q,
            scfg.t,
            table.growth_factor,
            table.band_ratio,
            if pass { "pass" } else { "FAIL" }
        );
        rows.push(SharpnessVerdict {
            p: case.p,
            q: case.q,
            t: scfg.t,
            threshold,
            above,
            growth_factor: table.growth_factor,
            band_ratio: table.band_ratio,
            pass,
        });
    }
    let all_pass = rows.iter().all(|r| r.pass);
    std::fs::write(a.out.join("growth.csv"), &csv)?;
    std::fs::write(
        a.out.join("summary.json"),
        serde_json::to_string_pretty(&SharpnessSummary { rows, all_pass })?,
    )?;
    Ok(all_pass)
}

// =====================================================
// frame
// =====================================================

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameConfig {
    dim: usize,
    grid_n: usize,
    grid_l: f64,
    alpha: f64,
    r: f64,
    eta: f64,
    trunc: f64,
    band: f64,
    n_signals: usize,
    seed: u64,
    p: Exponent,
    q: Exponent,
    s: f64,
    export_coeffs: bool,
}

impl Default for FrameConfig {
    fn default() -> Self {
        FrameConfig {
            dim: 1,
            grid_n: 1 << 12,
            grid_l: 40.0,
            alpha: 0.5,
            r: 4.0,
            eta: 0.25,
            trunc: 60.0,
            band: 40.0,
            n_signals: 20,
            seed: 77,
            p: Exponent::two(),
            q: Exponent::two(),
            s: 0.0,
            export_coeffs: false,
        }
    }
}

#[derive(Serialize)]
struct FrameSummary {
    max_roundtrip_error: f64,
    ratio_interval: (f64, f64),
    ratio_interval_doubled: (f64, f64),
    interval_drift: f64,
    gram_delta: f64,
    pass: bool,
}

fn cmd_frame(a: &RunArgs) -> Result<bool, Error> {
    use alphamod::brushlet::{
        analyze, frame_norm_equivalence_report, gram_report, roundtrip_error, Bell, BrushletFrame,
    };
    let mut cfg: FrameConfig = load_config(&a.config)?;
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    std::fs::create_dir_all(&a.out)?;
    let grid = GridSpec::new(cfg.dim, cfg.grid_n, cfg.grid_l)?;
    let grid2 = grid.doubled();
    let bell = Bell::new(cfg.eta)?;
    let frame = BrushletFrame::build(&grid, cfg.alpha, cfg.r, cfg.trunc, cfg.band, bell)?;
    let frame2 = BrushletFrame::build(&grid2, cfg.alpha, cfg.r, cfg.trunc, cfg.band, bell)?;
    let cov = build_ball_covering_default(cfg.dim, cfg.alpha, cfg.trunc)?;
    let bapu = Bapu::build(&cov, &grid)?;
    let bapu2 = Bapu::build(&cov, &grid2)?;
    let params = SpaceParams::new(cfg.alpha, cfg.p, cfg.q, cfg.s)?;

    let signals: Vec<_> = (0..cfg.n_signals)
        .map(|i| {
            let kind = TestSignalKind::RandomBandlimited {
                seed: cfg.seed + i as u64,
                band_radius: cfg.band * 0.9,
            };
            (
                fft_forward(&make_test_signal(&kind, &grid)),
                fft_forward(&make_test_signal(&kind, &grid2)),
            )
        })
        .collect();
    let mut max_rt = 0.0f64;
    for (f, _) in &signals {
        max_rt = max_rt.max(roundtrip_error(&frame, f)?);
    }
    let sig1: Vec<_> = signals.iter().map(|s| s.0.clone()).collect();
    let sig2: Vec<_> = signals.iter().map(|s| s.1.clone()).collect();
    let eq1 = frame_norm_equivalence_report(&frame, &bapu, &sig1, &params, NormRoute::GlobalFft)?;
    let eq2 = frame_norm_equivalence_report(&frame2, &bapu2, &sig2, &params, NormRoute::GlobalFft)?;
    let drift = ((eq2.min_ratio - eq1.min_ratio).abs() / eq1.min_ratio)
        .max((eq2.max_ratio - eq1.max_ratio).abs() / eq1.max_ratio);
    let mid = frame.cube_ids().len() / 2;
    let gram_k = match &frame.cube_ids()[mid] {
        alphamod::covering::PatchId::Lattice(k) => k.clone(),
        _ => vec![1],
    };
    let gram = gram_report(&frame, &gram_k, 24)?;
    let delta = gram
        .max_offdiag
        .max((gram.diag_min - 1.0).abs())
        .max((gram.diag_max - 1.0).abs());
    if cfg.export_coeffs {
        let coeffs = analyze(&sig1[0], &frame)?;
        std::fs::write(a.out.join("coeffs.csv"), coeffs.to_csv())?;
    }
    let pass = max_rt <= 1e-6 && drift <= 0.1;
    let summary = FrameSummary {
        max_roundtrip_error: max_rt,
        ratio_interval: (eq1.min_ratio, eq1.max_ratio),
        ratio_interval_doubled: (eq2.min_ratio, eq2.max_ratio),
        interval_drift: drift,
        gram_delta: delta,
        pass,
    };
    std::fs::write(
        a.out.join("frame.json"),
        serde_json::to_string_pretty(&summary)?,
    )?;
    eprintln!(
        "frame: roundtrip {max_rt:.3e}, ratios [{:.4}, {:.4}], drift {drift:.4}, gram δ {delta:.3}",
        eq1.min_ratio, eq1.max_ratio
    );
    Ok(pass)
}
