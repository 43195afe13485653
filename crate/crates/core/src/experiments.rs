//! Numerical verification of the scale embeddings, their endpoint
//! estimates, and the divergence of the extremal families that witness
//! sharpness of the weight shifts.
//!
//! The harness precomputes, per (α, grid, signal), the full table of patch
//! L^p norms; every embedding case is then an arithmetic pass over those
//! tables, so a large exponent grid costs barely more than one case.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::bapu::{plateau_profile, Bapu};
use crate::covering::{
    build_ball_covering_default, build_metric_covering, neighbor_map, Covering, PatchId,
};
use crate::error::{Error, Result};
use crate::indices::{theta1, theta2, weight_shift, Exponent, SpaceParams};
use crate::signal::{
    fft_forward, make_test_signal, norm_from_table, piece_table, GridSpec, NormRoute, PieceTable,
    SpectralSignal, TestSignalKind,
};

fn bracket(x: f64) -> f64 {
    (1.0 + x * x).sqrt()
}

// =====================================================
// Embedding harness
// =====================================================

#[derive(Clone, Copy, Debug, Serialize)]
pub struct EmbeddingCase {
    pub d: usize,
    pub alpha1: f64,
    pub alpha2: f64,
    pub p: Exponent,
    pub q: Exponent,
    pub s: f64,
}

#[derive(Clone, Debug)]
pub struct EmbedHarnessConfig {
    pub grid: GridSpec,
    pub trunc: f64,
    pub band: f64,
    pub alphas: Vec<f64>,
    pub n_signals: usize,
    pub seed: u64,
    pub ps: Vec<Exponent>,
    pub route: NormRoute,
    /// metric-covering scale used for α = 1
    pub metric_r: f64,
    pub check_grid_doubling: bool,
}

impl Default for EmbedHarnessConfig {
    fn default() -> Self {
        EmbedHarnessConfig {
            grid: GridSpec::new(1, 1 << 14, 30.0).unwrap(),
            trunc: 150.0,
            band: 60.0,
            alphas: vec![0.0, 0.5, 1.0],
            n_signals: 8,
            seed: 2024,
            ps: vec![
                Exponent::one(),
                Exponent::two(),
                Exponent::from_int(4).unwrap(),
                Exponent::from_int(8).unwrap(),
                Exponent::infinity(),
            ],
            route: NormRoute::GlobalFft,
            metric_r: 0.75,
            check_grid_doubling: true,
        }
    }
}

fn alpha_key(alpha: f64) -> u64 {
    alpha.to_bits()
}

/// Covering used for a given α in the experiment harnesses.
pub fn experiment_covering(d: usize, alpha: f64, trunc: f64, metric_r: f64) -> Result<Covering> {
    if alpha >= 1.0 {
        build_metric_covering(d, alpha, metric_r, trunc)
    } else {
        build_ball_covering_default(d, alpha, trunc)
    }
}

pub struct EmbedHarness {
    cfg: EmbedHarnessConfig,
    grids: Vec<GridSpec>,
    bapus: BTreeMap<u64, Vec<Bapu>>,
    signals: Vec<Vec<SpectralSignal>>,
    tables: HashMap<(u64, usize, usize), PieceTable>,
}

impl EmbedHarness {
    pub fn new(cfg: EmbedHarnessConfig) -> Result<EmbedHarness> {
        let mut grids = vec![cfg.grid];
        if cfg.check_grid_doubling {
            grids.push(cfg.grid.doubled());
        }
        if cfg.grid.nyquist_radius() < cfg.trunc {
            return Err(Error::invalid(format!(
                "grid Nyquist {} below truncation {}",
                cfg.grid.nyquist_radius(),
                cfg.trunc
            )));
        }
        let mut bapus = BTreeMap::new();
        for &alpha in &cfg.alphas {
            let cov = experiment_covering(cfg.grid.d, alpha, cfg.trunc, cfg.metric_r)?;
            let per_grid = grids
                .iter()
                .map(|g| Bapu::build(&cov, g))
                .collect::<Result<Vec<_>>>()?;
            bapus.insert(alpha_key(alpha), per_grid);
        }
        let mut signals = Vec::new();
        for g in &grids {
            let mut per = Vec::new();
            for i in 0..cfg.n_signals {
                let kind = TestSignalKind::RandomBandlimited {
                    seed: cfg.seed + i as u64,
                    band_radius: cfg.band,
                };
                per.push(fft_forward(&make_test_signal(&kind, g)));
            }
            signals.push(per);
        }
        Ok(EmbedHarness { cfg, grids, bapus, signals, tables: HashMap::new() })
    }

    pub fn grids(&self) -> &[GridSpec] {
        &self.grids
    }

    pub fn config(&self) -> &EmbedHarnessConfig {
        &self.cfg
    }

    pub fn bapu(&self, alpha: f64, grid_idx: usize) -> Option<&Bapu> {
        self.bapus.get(&alpha_key(alpha)).map(|v| &v[grid_idx])
    }

    fn table(&mut self, alpha: f64, grid_idx: usize, signal_idx: usize) -> Result<&PieceTable> {
        let key = (alpha_key(alpha), grid_idx, signal_idx);
        if !self.tables.contains_key(&key) {
            let bapu = self
                .bapus
                .get(&alpha_key(alpha))
                .ok_or_else(|| Error::invalid(format!("harness lacks alpha = {alpha}")))?;
            let t = piece_table(
                &self.signals[grid_idx][signal_idx],
                &bapu[grid_idx],
                &self.cfg.ps,
                self.cfg.route,
            )?;
            self.tables.insert(key, t);
        }
        Ok(&self.tables[&key])
    }

    fn p_index(&self, p: Exponent) -> Result<usize> {
        self.cfg
            .ps
            .iter()
            .position(|&x| x == p)
            .ok_or_else(|| Error::invalid(format!("p = {p} not precomputed by the harness")))
    }

    pub fn norm(
        &mut self,
        alpha: f64,
        grid_idx: usize,
        signal_idx: usize,
        p: Exponent,
        q: Exponent,
        s: f64,
    ) -> Result<f64> {
        let p_idx = self.p_index(p)?;
        let t = self.table(alpha, grid_idx, signal_idx)?;
        Ok(norm_from_table(t, p_idx, q, s))
    }

    /// Two-sided embedding check for one case: worst ratios per grid plus
    /// their relative drift under grid doubling.
    pub fn verify_embedding(&mut self, case: &EmbeddingCase) -> Result<EmbedReport> {
        // index-level duality: the upper shift equals the negated lower
        // shift of the conjugate pair
        let t1 = theta1(case.p, case.q);
        let t2c = theta2(case.p.conjugate(), case.q.conjugate());
        assert_eq!(t1, -t2c, "index duality violated");
        let shift_upper = weight_shift(case.d, case.alpha1, case.alpha2, t1)?;
        let shift_lower =
            weight_shift(case.d, case.alpha1, case.alpha2, theta2(case.p, case.q))?;
        let n_grids = self.grids.len();
        let mut worst_upper = vec![0.0f64; n_grids];
        let mut worst_lower = vec![0.0f64; n_grids];
        for g in 0..n_grids {
            for i in 0..self.cfg.n_signals {
                let n1 = self.norm(case.alpha1, g, i, case.p, case.q, case.s)?;
                let n2u =
                    self.norm(case.alpha2, g, i, case.p, case.q, case.s + shift_upper)?;
                let n2l =
                    self.norm(case.alpha2, g, i, case.p, case.q, case.s + shift_lower)?;
                if n2u > 0.0 {
                    worst_upper[g] = worst_upper[g].max(n1 / n2u);
                }
                if n1 > 0.0 {
                    worst_lower[g] = worst_lower[g].max(n2l / n1);
                }
            }
        }
        let drift = |w: &[f64]| -> f64 {
            if w.len() < 2 || w[0] == 0.0 {
                0.0
            } else {
                (w[1] - w[0]).abs() / w[0]
            }
        };
        Ok(EmbedReport {
            case: *case,
            shift_upper,
            shift_lower,
            worst_upper: worst_upper.clone(),
            worst_lower: worst_lower.clone(),
            drift_upper: drift(&worst_upper),
            drift_lower: drift(&worst_lower),
        })
    }

    /// Measured constant of the piece estimate
    /// ‖ψ_i(D)f‖_p ≲ Σ_{j∈Ω_i} ‖φ_j(D)f‖_p.
    pub fn lp_estimate_constant(
        &mut self,
        alpha1: f64,
        alpha2: f64,
        p: Exponent,
        grid_idx: usize,
    ) -> Result<f64> {
        let p_idx = self.p_index(p)?;
        let cov1 = self
            .bapu(alpha1, grid_idx)
            .ok_or_else(|| Error::invalid("missing alpha1".to_string()))?
            .covering()
            .clone();
        let cov2 = self
            .bapu(alpha2, grid_idx)
            .ok_or_else(|| Error::invalid("missing alpha2".to_string()))?
            .covering()
            .clone();
        let nm = neighbor_map(&cov1, &cov2)?;
        let mut worst = 0.0f64;
        for sig in 0..self.cfg.n_signals {
            let t1: HashMap<PatchId, f64> = self
                .table(alpha1, grid_idx, sig)?
                .rows
                .iter()
                .map(|r| (r.id.clone(), r.lp[p_idx]))
                .collect();
            let t2 = self.table(alpha2, grid_idx, sig)?;
            for row in &t2.rows {
                if row.lp[p_idx] == 0.0 {
                    continue;
                }
                let denom: f64 = nm
                    .omega
                    .get(&row.id)
                    .map(|js| js.iter().filter_map(|j| t1.get(j)).sum())
                    .unwrap_or(0.0);
                if denom > 0.0 {
                    worst = worst.max(row.lp[p_idx] / denom);
                }
            }
        }
        Ok(worst)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EmbedReport {
    pub case: EmbeddingCase,
    pub shift_upper: f64,
    pub shift_lower: f64,
    pub worst_upper: Vec<f64>,
    pub worst_lower: Vec<f64>,
    pub drift_upper: f64,
    pub drift_lower: f64,
}

impl EmbedReport {
    pub fn stable_within(&self, tol: f64) -> bool {
        self.worst_upper.iter().all(|w| w.is_finite())
            && self.worst_lower.iter().all(|w| w.is_finite())
            && self.drift_upper <= tol
            && self.drift_lower <= tol
    }
}

pub const EMBED_CSV_HEADER: &str =
    "d,alpha1,alpha2,p,q,s,shift_upper,shift_lower,worst_upper,worst_upper_2n,worst_lower,worst_lower_2n,drift_upper,drift_lower";

pub fn embed_csv_row(r: &EmbedReport) -> String {
    let g2 = |v: &[f64]| if v.len() > 1 { v[1] } else { f64::NAN };
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        r.case.d,
        r.case.alpha1,
        r.case.alpha2,
        r.case.p,
        r.case.q,
        r.case.s,
        r.shift_upper,
        r.shift_lower,
        r.worst_upper[0],
        g2(&r.worst_upper),
        r.worst_lower[0],
        g2(&r.worst_lower),
        r.drift_upper,
        r.drift_lower
    )
}

// =====================================================
// Endpoint estimates
// =====================================================

#[derive(Clone, Debug, Serialize)]
pub struct EndpointRow {
    pub p: Exponent,
    pub q: Exponent,
    /// shift on the forward-inclusion side as printed in the endpoint
    /// estimates, in units of d(α₂−α₁)
    pub shift_factor: f64,
    pub report: EmbedReport,
    pub lp_estimate_constant: f64,
}

/// Runs the five endpoint exponent pairs with their stated shifts, checks
/// each shift against the index functions (and the dual formulation), and
/// measures the piece-estimate constant behind them.
pub fn verify_endpoints(
    harness: &mut EmbedHarness,
    d: usize,
    alpha1: f64,
    alpha2: f64,
    s: f64,
) -> Result<Vec<EndpointRow>> {
    let inf = Exponent::infinity();
    let one = Exponent::one();
    let two = Exponent::two();
    let pairs: [(Exponent, Exponent, f64); 5] = [
        (two, inf, -0.5),
        (one, one, 0.0),
        (one, inf, -1.0),
        (inf, one, 0.0),
        (inf, inf, -1.0),
    ];
    let mut rows = Vec::new();
    for (p, q, factor) in pairs {
        let stated = d as f64 * (alpha2 - alpha1) * factor;
        let from_theta2 = weight_shift(d, alpha1, alpha2, theta2(p, q))?;
        let from_dual = -weight_shift(d, alpha1, alpha2, theta1(p.conjugate(), q.conjugate()))?;
        if (stated - from_theta2).abs() > 1e-12 || (stated - from_dual).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "endpoint shift mismatch at ({p},{q}): stated {stated}, θ₂ gives {from_theta2}"
            )));
        }
        let case = EmbeddingCase { d, alpha1, alpha2, p, q, s };
        let report = harness.verify_embedding(&case)?;
        let lp_c = harness.lp_estimate_constant(alpha1, alpha2, p, 0)?;
        rows.push(EndpointRow { p, q, shift_factor: factor, report, lp_estimate_constant: lp_c });
    }
    Ok(rows)
}

// =====================================================
// Extremal families
// =====================================================

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BumpMode {
    /// bump width ∝ ⟨ξ_i⟩^{α₂}, weights from the divergence construction
    Scaled,
    /// fixed-width bumps, unit weights
    Fixed,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExtremalFamily {
    pub centers: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub mode: BumpMode,
    pub eps: f64,
    pub bump_r: f64,
}

/// Centers along the positive axis forming a maximal packing of disjoint
/// half-balls B(ξ, r⟨ξ⟩^α/2); stops at `limit`.
pub fn plateau_center_schedule(
    alpha: f64,
    r: f64,
    xi_start: f64,
    count: usize,
    limit: f64,
) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    let mut x = xi_start;
    let margin = 1.05;
    while out.len() < count {
        if x + 0.5 * r * bracket(x).powf(alpha) > limit {
            break;
        }
        out.push(x);
        // fixed-point solve x' = x + (r/2)(⟨x⟩^α + ⟨x'⟩^α)·margin
        let mut next = x + r * bracket(x).powf(alpha) * margin;
        for _ in 0..32 {
            next = x + 0.5 * r * (bracket(x).powf(alpha) + bracket(next).powf(alpha)) * margin;
        }
        x = next;
    }
    out
}

pub struct ExtremalSpec {
    pub d: usize,
    pub alpha1: f64,
    pub alpha2: f64,
    pub p: Exponent,
    pub q: Exponent,
    pub s: f64,
    pub eps: f64,
    pub xi_start: f64,
}

/// Builds f̂ = Σ t_i ϑ_i supported in the adjoined plateau balls of the
/// α₂ partition; returns the spectrum, the family data and the extended
/// partition whose plateau windows isolate each bump exactly.
pub fn build_extremal(
    bapu_alpha2: &Bapu,
    spec: &ExtremalSpec,
    n_family: usize,
    mode: BumpMode,
    grid: &GridSpec,
) -> Result<(SpectralSignal, ExtremalFamily, Bapu)> {
    let r = bapu_alpha2.covering().r();
    let alpha2 = bapu_alpha2.covering().alpha();
    let limit = bapu_alpha2.unity_radius();
    let centers_1d = plateau_center_schedule(alpha2, r, spec.xi_start, n_family, limit);
    if centers_1d.len() < n_family {
        return Err(Error::invalid(format!(
            "grid holds only {} disjoint plateau balls (requested {n_family})",
            centers_1d.len()
        )));
    }
    let centers: Vec<Vec<f64>> = centers_1d
        .iter()
        .map(|&x| {
            let mut c = vec![0.0; spec.d];
            c[0] = x;
            c
        })
        .collect();
    let ext = bapu_alpha2.adjoin_plateau(&centers)?;

    let d = spec.d as f64;
    let gap = alpha2 - spec.alpha1;
    let rp_conj = spec.p.conjugate().recip_f64();
    let rq = spec.q.recip_f64();
    let weights: Vec<f64> = (1..=n_family)
        .map(|i| match mode {
            BumpMode::Fixed => 1.0,
            BumpMode::Scaled => {
                let xi = bracket(centers_1d[i - 1]);
                if spec.q.is_infinite() {
                    xi.powf(-spec.s - d * spec.alpha1 * rp_conj)
                } else {
                    bracket(i as f64).powf(-2.0 * rq)
                        * xi.powf(-spec.s - d * gap * rq - d * spec.alpha1 * rp_conj)
                }
            }
        })
        .collect();

    let mut f = SpectralSignal::zero(*grid);
    for (ci, c) in centers.iter().enumerate() {
        let scale = match mode {
            BumpMode::Scaled => bracket(centers_1d[ci]).powf(alpha2),
            BumpMode::Fixed => 1.0,
        };
        // support strictly inside the plateau's quarter ball
        let outer = 0.25 * r * scale;
        let inner = 0.125 * r * scale;
        let lo = grid.axis_range(c[0] - outer, c[0] + outer);
        let r1 = if grid.d == 2 {
            grid.axis_range(c[1] - outer, c[1] + outer)
        } else {
            Some((0, 0))
        };
        if let (Some(r0), Some(r1)) = (lo, r1) {
            for i0 in r0.0..=r0.1 {
                for i1 in r1.0..=r1.1 {
                    let flat = grid.flat([i0, i1]);
                    let xi = grid.xi(flat);
                    let mut t2 = 0.0;
                    for a in 0..grid.d {
                        t2 += (xi[a] - c[a]) * (xi[a] - c[a]);
                    }
                    let t = t2.sqrt();
                    if t < outer {
                        f.coeffs[flat] += weights[ci] * plateau_profile(t, inner, outer);
                    }
                }
            }
        }
    }
    Ok((
        f,
        ExtremalFamily { centers, weights, mode, eps: spec.eps, bump_r: r },
        ext,
    ))
}

// =====================================================
// Sharpness growth
// =====================================================

#[derive(Clone, Debug)]
pub struct SharpnessConfig {
    pub d: usize,
    pub alpha1: f64,
    pub alpha2: f64,
    pub p: Exponent,
    pub q: Exponent,
    pub s: f64,
    /// weight on the α₂ side; the threshold is s + d(α₂−α₁)θ₂(p,q)
    pub t: f64,
    pub n_list: Vec<usize>,
    pub eps: f64,
    pub grid: GridSpec,
    pub trunc: f64,
    pub xi_start: f64,
    pub metric_r: f64,
    pub route: NormRoute,
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthRow {
    pub n: usize,
    pub norm_alpha1: f64,
    pub norm_alpha2: f64,
    pub rho: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthTable {
    pub threshold: f64,
    pub t: f64,
    pub mode: BumpMode,
    pub rows: Vec<GrowthRow>,
    /// ρ(N_max)/ρ(N_min)
    pub growth_factor: f64,
    /// max/min of ρ across the schedule
    pub band_ratio: f64,
    /// stability of the computed α₂ norm against its closed-form value
    /// (max/min across the schedule of their ratio)
    pub exact_side_drift: f64,
}

/// The extremal mode that witnesses the θ₂ threshold: fixed-width bumps
/// when θ₂ = 0, dilated bumps otherwise.
pub fn sharpness_mode_for(p: Exponent, q: Exponent) -> BumpMode {
    if theta2(p, q) == num_rational::Rational64::new(0, 1) {
        BumpMode::Fixed
    } else {
        BumpMode::Scaled
    }
}

pub fn sharpness_threshold(cfg: &SharpnessConfig) -> Result<f64> {
    Ok(cfg.s + weight_shift(cfg.d, cfg.alpha1, cfg.alpha2, theta2(cfg.p, cfg.q))?)
}

pub fn sharpness_growth(cfg: &SharpnessConfig) -> Result<GrowthTable> {
    let mode = sharpness_mode_for(cfg.p, cfg.q);
    let threshold = sharpness_threshold(cfg)?;
    // metric coverings on both sides: their patch geometry is uniform at
    // every scale, so per-bump piece norms carry no finite-size ramp at the
    // low-frequency end of the schedule
    let cov1 = build_metric_covering(cfg.d, cfg.alpha1, cfg.metric_r, cfg.trunc)?;
    let bapu1 = Bapu::build(&cov1, &cfg.grid)?;
    let cov2 = build_metric_covering(cfg.d, cfg.alpha2, cfg.metric_r, cfg.trunc)?;
    let bapu2 = Bapu::build(&cov2, &cfg.grid)?;
    let spec = ExtremalSpec {
        d: cfg.d,
        alpha1: cfg.alpha1,
        alpha2: cfg.alpha2,
        p: cfg.p,
        q: cfg.q,
        s: cfg.s,
        eps: cfg.eps,
        xi_start: cfg.xi_start,
    };
    let d = cfg.d as f64;
    let rp_conj = cfg.p.conjugate().recip_f64();
    let mut rows = Vec::new();
    let mut exact_lo = f64::INFINITY;
    let mut exact_hi = 0.0f64;
    for &n in &cfg.n_list {
        let (f, family, ext) = build_extremal(&bapu2, &spec, n, mode, &cfg.grid)?;
        let params1 = SpaceParams::new(cfg.alpha1, cfg.p, cfg.q, cfg.s)?;
        let params2 = SpaceParams::new(cfg.alpha2, cfg.p, cfg.q, cfg.t)?;
        let (n1, _) = crate::signal::alpha_modulation_norm(&f, &bapu1, &params1, cfg.route)?;
        let (n2, _) = crate::signal::alpha_modulation_norm(&f, &ext, &params2, cfg.route)?;
        // closed-form α₂ side per the isolation of each bump
        let exact: f64 = crate::signal::weighted_power_sum(
            family.centers.iter().zip(&family.weights).map(|(c, &w)| {
                let xi = bracket(c[0]);
                let dil = match mode {
                    BumpMode::Scaled => xi.powf(cfg.alpha2 * d * rp_conj),
                    BumpMode::Fixed => 1.0,
                };
                w * xi.powf(cfg.t) * dil
            }),
            1.0,
            cfg.q,
        );
        if exact > 0.0 && n2 > 0.0 {
            exact_lo = exact_lo.min(n2 / exact);
            exact_hi = exact_hi.max(n2 / exact);
        }
        let rho = if n1 > 0.0 { n2 / n1 } else { f64::INFINITY };
        rows.push(GrowthRow { n, norm_alpha1: n1, norm_alpha2: n2, rho });
    }
    let rhos: Vec<f64> = rows.iter().map(|r| r.rho).collect();
    let growth_factor = rhos.last().unwrap_or(&0.0) / rhos.first().unwrap_or(&1.0);
    let max = rhos.iter().copied().fold(0.0f64, f64::max);
    let min = rhos.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(GrowthTable {
        threshold,
        t: cfg.t,
        mode,
        rows,
        growth_factor,
        band_ratio: if min > 0.0 { max / min } else { f64::INFINITY },
        exact_side_drift: if exact_lo > 0.0 && exact_lo.is_finite() {
            exact_hi / exact_lo
        } else {
            f64::INFINITY
        },
    })
}

pub const GROWTH_CSV_HEADER: &str =
    "d,alpha1,alpha2,p,q,s,t,threshold,mode,N,norm_alpha1,norm_alpha2,ratio";

pub fn growth_csv_rows(cfg: &SharpnessConfig, table: &GrowthTable) -> String {
    let mut out = String::new();
    for row in &table.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{:?},{},{},{},{}\n",
            cfg.d,
            cfg.alpha1,
            cfg.alpha2,
            cfg.p,
            cfg.q,
            cfg.s,
            cfg.t,
            table.threshold,
            table.mode,
            row.n,
            row.norm_alpha1,
            row.norm_alpha2,
            row.rho
        ));
    }
    out
}

// =====================================================
// Sharpness region
// =====================================================

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CorollaryRegion {
    pub sharp_upper_applies: bool,
    pub sharp_lower_applies: bool,
}

/// Literal evaluation of the sharpness-region predicates
/// 1/p ≤ max(1/2, 1/q) and 1/p ≥ min(1/2, 1/q).
pub fn corollary_region_check(p: Exponent, q: Exponent) -> CorollaryRegion {
    let half = num_rational::Rational64::new(1, 2);
    let rp = p.recip();
    let rq = q.recip();
    CorollaryRegion {
        sharp_upper_applies: rp <= half.max(rq),
        sharp_lower_applies: rp >= half.min(rq),
    }
}
