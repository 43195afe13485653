//! Sampled signals on a uniform periodic grid, the unitary DFT, Fourier
//! multiplier operators and the norm evaluators (L^p, H_s, weighted
//! decomposition norms).
//!
//! Conventions. The spatial domain is the torus [−L, L)^d sampled at n
//! points per axis, x_i = −L + i·Δx with Δx = 2L/n. Spectral samples sit
//! at ξ_m = (m − n/2)·Δξ with Δξ = π/L, so Δx·Δξ·n = 2π and the forward
//! transform
//!
//!   f̂(ξ) = (2π)^{-d/2} ∫ f(x) e^{-i x·ξ} dx
//!
//! discretizes to a unitary map between the Δx- and Δξ-weighted l² norms
//! (Parseval holds on the grid to rounding). The sign-flip trick below
//! turns the centered grids into plain FFT calls; it needs n ≡ 0 mod 4,
//! which `GridSpec::new` enforces.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::bapu::{Bapu, WindowSymbol};
use crate::covering::PatchId;
use crate::error::{Error, Result};
use crate::indices::{Exponent, SpaceParams};

/// Relative spectral mass allowed outside the certified region of a BAPU
/// before a norm evaluation refuses to proceed.
pub const LEAKAGE_LIMIT: f64 = 1e-6;

// =====================================================
// Grid
// =====================================================

/// Uniform periodic grid on [−L, L)^d with n samples per axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub d: usize,
    pub n: usize,
    pub half_width: f64,
}

impl GridSpec {
    pub fn new(d: usize, n: usize, half_width: f64) -> Result<Self> {
        if d != 1 && d != 2 {
            return Err(Error::invalid(format!("dimension {d} unsupported (1 or 2)")));
        }
        if !n.is_power_of_two() || n < 8 {
            return Err(Error::invalid(format!("n = {n} must be a power of two >= 8")));
        }
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::invalid(format!("half width {half_width} not positive")));
        }
        Ok(GridSpec { d, n, half_width })
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn dxi(&self) -> f64 {
        std::f64::consts::PI / self.half_width
    }

    pub fn nyquist_radius(&self) -> f64 {
        self.n as f64 / 2.0 * self.dxi()
    }

    pub fn cell_volume(&self) -> f64 {
        self.dx().powi(self.d as i32)
    }

    pub fn spectral_cell(&self) -> f64 {
        self.dxi().powi(self.d as i32)
    }

    pub fn axis_x(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.dx()
    }

    pub fn axis_xi(&self, i: usize) -> f64 {
        (i as f64 - self.n as f64 / 2.0) * self.dxi()
    }

    pub fn split(&self, flat: usize) -> [usize; 2] {
        if self.d == 1 {
            [flat, 0]
        } else {
            [flat / self.n, flat % self.n]
        }
    }

    pub fn flat(&self, idx: [usize; 2]) -> usize {
        if self.d == 1 {
            idx[0]
        } else {
            idx[0] * self.n + idx[1]
        }
    }

    pub fn xi(&self, flat: usize) -> [f64; 2] {
        let ix = self.split(flat);
        if self.d == 1 {
            [self.axis_xi(ix[0]), 0.0]
        } else {
            [self.axis_xi(ix[0]), self.axis_xi(ix[1])]
        }
    }

    pub fn xi_abs(&self, flat: usize) -> f64 {
        let v = self.xi(flat);
        (v[0] * v[0] + v[1] * v[1]).sqrt()
    }

    /// Doubled resolution at the same physical extent (refines Δx, extends
    /// the Nyquist radius, keeps Δξ and the in-band spectral samples).
    pub fn doubled(&self) -> GridSpec {
        GridSpec { d: self.d, n: 2 * self.n, half_width: self.half_width }
    }

    /// Axis index range (inclusive) covering the closed ξ-interval, clamped
    /// to the grid; None if the interval misses the grid entirely.
    pub fn axis_range(&self, lo: f64, hi: f64) -> Option<(usize, usize)> {
        let dxi = self.dxi();
        let half = self.n as f64 / 2.0;
        let a = (lo / dxi + half).ceil().max(0.0);
        let b = (hi / dxi + half).floor().min(self.n as f64 - 1.0);
        if a > b {
            None
        } else {
            Some((a as usize, b as usize))
        }
    }
}

/// Rectangular index block in the spectral grid (inclusive lo, extent size).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpan {
    pub lo: [usize; 2],
    pub size: [usize; 2],
}

impl GridSpan {
    pub fn empty() -> Self {
        GridSpan { lo: [0, 0], size: [0, 0] }
    }

    pub fn from_ranges(d: usize, r0: (usize, usize), r1: (usize, usize)) -> Self {
        if d == 1 {
            GridSpan { lo: [r0.0, 0], size: [r0.1 - r0.0 + 1, 1] }
        } else {
            GridSpan { lo: [r0.0, r1.0], size: [r0.1 - r0.0 + 1, r1.1 - r1.0 + 1] }
        }
    }

    pub fn len(&self) -> usize {
        self.size[0] * self.size[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Global flat index of the local (row-major) offset.
    pub fn global_flat(&self, grid: &GridSpec, off: usize) -> usize {
        if grid.d == 1 {
            self.lo[0] + off
        } else {
            let i0 = self.lo[0] + off / self.size[1];
            let i1 = self.lo[1] + off % self.size[1];
            i0 * grid.n + i1
        }
    }
}

// =====================================================
// Signals and the DFT
// =====================================================

#[derive(Clone, Debug)]
pub struct Signal {
    pub grid: GridSpec,
    pub samples: Vec<Complex64>,
}

#[derive(Clone, Debug)]
pub struct SpectralSignal {
    pub grid: GridSpec,
    pub coeffs: Vec<Complex64>,
}

impl Signal {
    pub fn zero(grid: GridSpec) -> Signal {
        Signal { grid, samples: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }
}

impl SpectralSignal {
    pub fn zero(grid: GridSpec) -> SpectralSignal {
        SpectralSignal { grid, coeffs: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    /// Total spectral mass Σ|f̂|² Δξ^d.
    pub fn mass(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.spectral_cell()
    }
}

fn planner() -> &'static Mutex<FftPlanner<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()))
}

pub(crate) fn fft_plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut p = planner().lock().unwrap();
    if inverse {
        p.plan_fft_inverse(n)
    } else {
        p.plan_fft_forward(n)
    }
}

/// Apply a 1-D FFT along every row, and for d = 2 along both axes.
fn fft_axes(buf: &mut [Complex64], grid: &GridSpec, plan: &Arc<dyn Fft<f64>>) {
    let n = grid.n;
    let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
    for row in buf.chunks_exact_mut(n) {
        plan.process_with_scratch(row, &mut scratch);
    }
    if grid.d == 2 {
        // transpose, transform rows, transpose back
        let mut t = vec![Complex64::new(0.0, 0.0); buf.len()];
        for i in 0..n {
            for j in 0..n {
                t[j * n + i] = buf[i * n + j];
            }
        }
        for row in t.chunks_exact_mut(n) {
            plan.process_with_scratch(row, &mut scratch);
        }
        for i in 0..n {
            for j in 0..n {
                buf[j * n + i] = t[i * n + j];
            }
        }
    }
}

fn parity_sign(grid: &GridSpec, flat: usize) -> f64 {
    let ix = grid.split(flat);
    if (ix[0] + ix[1]) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

pub fn fft_forward(f: &Signal) -> SpectralSignal {
    let grid = f.grid;
    let mut buf: Vec<Complex64> = f
        .samples
        .iter()
        .enumerate()
        .map(|(i, &v)| v * parity_sign(&grid, i))
        .collect();
    let plan = fft_plan(grid.n, false);
    fft_axes(&mut buf, &grid, &plan);
    let scale = (grid.dx() / (2.0 * std::f64::consts::PI).sqrt()).powi(grid.d as i32);
    for (m, v) in buf.iter_mut().enumerate() {
        *v *= scale * parity_sign(&grid, m);
    }
    SpectralSignal { grid, coeffs: buf }
}

pub fn fft_inverse(f: &SpectralSignal) -> Signal {
    let grid = f.grid;
    let mut buf: Vec<Complex64> = f
        .coeffs
        .iter()
        .enumerate()
        .map(|(m, &v)| v * parity_sign(&grid, m))
        .collect();
    let plan = fft_plan(grid.n, true);
    fft_axes(&mut buf, &grid, &plan);
    let scale = (grid.dxi() / (2.0 * std::f64::consts::PI).sqrt()).powi(grid.d as i32);
    for (i, v) in buf.iter_mut().enumerate() {
        *v *= scale * parity_sign(&grid, i);
    }
    Signal { grid, samples: buf }
}

/// Fourier multiplier: pointwise product with the window symbol in the
/// spectral domain followed by the inverse transform.
pub fn multiplier_apply(window: &WindowSymbol, f: &SpectralSignal) -> Signal {
    let mut out = SpectralSignal::zero(f.grid);
    for (off, &w) in window.values.iter().enumerate() {
        let g = window.span.global_flat(&f.grid, off);
        out.coeffs[g] = f.coeffs[g] * w;
    }
    fft_inverse(&out)
}

// =====================================================
// Norms
// =====================================================

/// Stabilized (Σ v^p · cell)^{1/p} over nonnegative values; p = ∞ is a max.
pub fn weighted_power_sum(values: impl Iterator<Item = f64>, cell: f64, p: Exponent) -> f64 {
    if p.is_infinite() {
        return values.fold(0.0_f64, f64::max);
    }
    let vals: Vec<f64> = values.collect();
    let max = vals.iter().fold(0.0_f64, |a, &b| a.max(b));
    if max == 0.0 {
        return 0.0;
    }
    let pf = p.as_f64();
    let sum: f64 = if p.is_one() {
        vals.iter().map(|v| v / max).sum()
    } else if pf == 2.0 {
        vals.iter().map(|v| (v / max) * (v / max)).sum()
    } else {
        vals.iter().map(|v| (v / max).powf(pf)).sum()
    };
    max * sum.powf(1.0 / pf) * cell.powf(1.0 / pf)
}

/// Grid L^p norm (Riemann sum with the cell volume; p = ∞ is the max modulus).
pub fn lp_norm(f: &Signal, p: Exponent) -> f64 {
    weighted_power_sum(f.samples.iter().map(|c| c.norm()), f.grid.cell_volume(), p)
}

/// Sobolev norm (∫ ⟨ξ⟩^{2s} |f̂|² dξ)^{1/2} by spectral quadrature.
pub fn sobolev_norm(f: &SpectralSignal, s: f64) -> f64 {
    let cell = f.grid.spectral_cell();
    let sum: f64 = f
        .coeffs
        .iter()
        .enumerate()
        .map(|(m, c)| {
            let a = f.grid.xi_abs(m);
            (1.0 + a * a).powf(s) * c.norm_sqr()
        })
        .sum();
    (sum * cell).sqrt()
}

// =====================================================
// Piece norms over a BAPU
// =====================================================

/// Which evaluation path computes piece L^p norms.
///
/// `LocalSlice` inverse-transforms only the window's spectral slice on a
/// small oversampled grid; values of the band-limited piece are exact there
/// and the result does not depend on n. `GlobalFft` is the reference path
/// through a full-size inverse FFT.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormRoute {
    LocalSlice,
    GlobalFft,
}

const LOCAL_OVERSAMPLE: usize = 16;

fn local_fft_plan_cache() -> &'static Mutex<HashMap<usize, Arc<dyn Fft<f64>>>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<dyn Fft<f64>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn local_plan(n: usize) -> Arc<dyn Fft<f64>> {
    let mut c = local_fft_plan_cache().lock().unwrap();
    c.entry(n).or_insert_with(|| fft_plan(n, true)).clone()
}

/// Moduli of the band-limited function with spectrum `slice` on the span,
/// evaluated on an oversampled coarse x-grid, with the quadrature cell.
/// The point values are exact (the zero-padded inverse DFT evaluates the
/// defining exponential sum); only the Riemann quadrature built on them is
/// approximate, controlled by `oversample`.
pub(crate) fn slice_transform_moduli(
    grid: &GridSpec,
    span: &GridSpan,
    slice: &[Complex64],
    oversample: usize,
) -> (Vec<f64>, f64) {
    let np = |w: usize| -> usize { (oversample * w).max(32).next_power_of_two() };
    let scale = (grid.dxi() / (2.0 * std::f64::consts::PI).sqrt()).powi(grid.d as i32);
    if grid.d == 1 {
        let n1 = np(span.size[0]);
        let mut buf = vec![Complex64::new(0.0, 0.0); n1];
        for (j, &c) in slice.iter().enumerate() {
            buf[j] = if j % 2 == 0 { c } else { -c };
        }
        let plan = local_plan(n1);
        plan.process(&mut buf);
        let cell = 2.0 * grid.half_width / n1 as f64;
        (buf.iter().map(|c| c.norm() * scale).collect(), cell)
    } else {
        let (w0, w1) = (span.size[0], span.size[1]);
        let (n0, n1) = (np(w0), np(w1));
        let mut buf = vec![Complex64::new(0.0, 0.0); n0 * n1];
        for j0 in 0..w0 {
            for j1 in 0..w1 {
                let c = slice[j0 * w1 + j1];
                let sgn = if (j0 + j1) % 2 == 0 { 1.0 } else { -1.0 };
                buf[j0 * n1 + j1] = c * sgn;
            }
        }
        let plan1 = local_plan(n1);
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan1.get_inplace_scratch_len()];
        for row in buf.chunks_exact_mut(n1) {
            plan1.process_with_scratch(row, &mut scratch);
        }
        let plan0 = local_plan(n0);
        let mut t = vec![Complex64::new(0.0, 0.0); n0 * n1];
        for i in 0..n0 {
            for j in 0..n1 {
                t[j * n0 + i] = buf[i * n1 + j];
            }
        }
        let mut scratch0 = vec![Complex64::new(0.0, 0.0); plan0.get_inplace_scratch_len()];
        for row in t.chunks_exact_mut(n0) {
            plan0.process_with_scratch(row, &mut scratch0);
        }
        let cell = (2.0 * grid.half_width / n0 as f64) * (2.0 * grid.half_width / n1 as f64);
        (t.iter().map(|c| c.norm() * scale).collect(), cell)
    }
}

/// Moduli of the windowed piece ψ(D)f on the oversampled coarse grid; None
/// when the slice is identically zero (piece norm 0, no transform needed).
pub(crate) fn local_piece_moduli(
    f: &SpectralSignal,
    span: &GridSpan,
    wvals: &[f64],
) -> Option<(Vec<f64>, f64)> {
    if span.is_empty() {
        return None;
    }
    let grid = &f.grid;
    let mut sliced = vec![Complex64::new(0.0, 0.0); span.len()];
    let mut any = false;
    for (off, &w) in wvals.iter().enumerate() {
        if w != 0.0 {
            let g = span.global_flat(grid, off);
            let c = f.coeffs[g];
            if c != Complex64::new(0.0, 0.0) {
                sliced[off] = c * w;
                any = true;
            }
        }
    }
    if !any {
        return None;
    }
    Some(slice_transform_moduli(grid, span, &sliced, LOCAL_OVERSAMPLE))
}

fn piece_lp_for_window(
    f: &SpectralSignal,
    w: &WindowSymbol,
    ps: &[Exponent],
    route: NormRoute,
) -> Vec<f64> {
    match route {
        NormRoute::LocalSlice => match local_piece_moduli(f, &w.span, &w.values) {
            None => vec![0.0; ps.len()],
            Some((moduli, cell)) => ps
                .iter()
                .map(|&p| weighted_power_sum(moduli.iter().copied(), cell, p))
                .collect(),
        },
        NormRoute::GlobalFft => {
            let piece = multiplier_apply(w, f);
            ps.iter().map(|&p| lp_norm(&piece, p)).collect()
        }
    }
}

/// L^p norms of every BAPU piece ψ_Q(D)f, for each p in `ps` at once.
#[derive(Clone, Debug)]
pub struct PieceRow {
    pub id: PatchId,
    pub xi_abs: f64,
    pub dyadic_level: Option<u32>,
    pub lp: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct PieceTable {
    pub ps: Vec<Exponent>,
    pub rows: Vec<PieceRow>,
    pub leaked_mass: f64,
    pub weight_dyadic: bool,
}

/// Relative spectral mass outside the BAPU's sum-to-one region.
pub fn spectral_leakage(f: &SpectralSignal, bapu: &Bapu) -> f64 {
    let radius = bapu.unity_radius();
    let mut inside = 0.0;
    let mut total = 0.0;
    for (m, c) in f.coeffs.iter().enumerate() {
        let e = c.norm_sqr();
        total += e;
        if f.grid.xi_abs(m) <= radius {
            inside += e;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        (total - inside) / total
    }
}

pub fn piece_table(
    f: &SpectralSignal,
    bapu: &Bapu,
    ps: &[Exponent],
    route: NormRoute,
) -> Result<PieceTable> {
    if f.grid != *bapu.grid() {
        return Err(Error::GridMismatch(format!(
            "signal grid {:?} vs bapu grid {:?}",
            f.grid,
            bapu.grid()
        )));
    }
    if f.grid.nyquist_radius() < bapu.covering().trunc_radius() {
        return Err(Error::invalid(format!(
            "Nyquist radius {} below covering truncation {}",
            f.grid.nyquist_radius(),
            bapu.covering().trunc_radius()
        )));
    }
    let leaked = spectral_leakage(f, bapu);
    if leaked > LEAKAGE_LIMIT {
        return Err(Error::SpectralLeakage { leaked, limit: LEAKAGE_LIMIT });
    }
    let rows: Vec<PieceRow> = bapu
        .windows()
        .par_iter()
        .map(|w| PieceRow {
            id: w.patch_id.clone(),
            xi_abs: w.xi_abs,
            dyadic_level: w.dyadic_level,
            lp: piece_lp_for_window(f, w, ps, route),
        })
        .collect();
    Ok(PieceTable {
        ps: ps.to_vec(),
        rows,
        leaked_mass: leaked,
        weight_dyadic: bapu.is_dyadic(),
    })
}

pub fn patch_weight(row: &PieceRow, s: f64, weight_dyadic: bool) -> f64 {
    match (weight_dyadic, row.dyadic_level) {
        (true, Some(j)) => 2.0_f64.powf(j as f64 * s),
        _ => (1.0 + row.xi_abs * row.xi_abs).powf(0.5 * s),
    }
}

/// Outer weighted l^q over the table's pieces for the p at index `p_idx`.
pub fn norm_from_table(t: &PieceTable, p_idx: usize, q: Exponent, s: f64) -> f64 {
    weighted_power_sum(
        t.rows
            .iter()
            .map(|r| patch_weight(r, s, t.weight_dyadic) * r.lp[p_idx]),
        1.0,
        q,
    )
}

/// Per-patch weighted piece norms backing a decomposition-norm value.
#[derive(Clone, Debug)]
pub struct PieceNorms {
    pub params: SpaceParams,
    pub entries: Vec<(PatchId, f64, f64)>,
    pub leaked_mass: f64,
}

/// Weighted decomposition norm (Σ_Q (w_Q ‖ψ_Q(D)f‖_{L^p})^q)^{1/q}.
///
/// For the dyadic family the weight is 2^{js} (the inhomogeneous smoothness
/// weight); every other family weighs by ⟨ξ_Q⟩^s.
pub fn alpha_modulation_norm(
    f: &SpectralSignal,
    bapu: &Bapu,
    params: &SpaceParams,
    route: NormRoute,
) -> Result<(f64, PieceNorms)> {
    let cov_alpha = bapu.covering().alpha();
    if (cov_alpha - params.alpha).abs() > 1e-9 {
        return Err(Error::invalid(format!(
            "params alpha {} does not match covering alpha {}",
            params.alpha, cov_alpha
        )));
    }
    let table = piece_table(f, bapu, &[params.p], route)?;
    let norm = norm_from_table(&table, 0, params.q, params.s);
    let entries = table
        .rows
        .iter()
        .map(|r| {
            (
                r.id.clone(),
                patch_weight(r, params.s, table.weight_dyadic),
                r.lp[0],
            )
        })
        .collect();
    Ok((
        norm,
        PieceNorms { params: *params, entries, leaked_mass: table.leaked_mass },
    ))
}

// =====================================================
// Test signals
// =====================================================

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestSignalKind {
    Gaussian {
        sigma: f64,
        center: f64,
        modulation: f64,
    },
    /// Sum of smooth spectral bumps weight·χ((ξ−c)/width).
    BumpTrain {
        centers: Vec<Vec<f64>>,
        weights: Vec<f64>,
        widths: Vec<f64>,
    },
    /// I.i.d. complex Gaussian spectral coefficients inside the band, zero
    /// outside. Coefficients are keyed by the signed mode index, so the same
    /// seed yields the same in-band content on any grid with equal Δξ.
    RandomBandlimited {
        seed: u64,
        band_radius: f64,
    },
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D049BB133111EB);
    x ^ (x >> 31)
}

fn mode_gaussian(seed: u64, m: [i64; 2]) -> Complex64 {
    let h = splitmix64(seed ^ splitmix64(m[0] as u64 ^ splitmix64(m[1] as u64 ^ 0xA5A5_5A5A)));
    let h2 = splitmix64(h);
    // Box-Muller from two uniforms in (0, 1)
    let u1 = ((h >> 11) as f64 + 1.0) / (1u64 << 53) as f64;
    let u2 = ((h2 >> 11) as f64 + 1.0) / (1u64 << 53) as f64;
    let r = (-2.0 * u1.ln()).sqrt();
    let th = 2.0 * std::f64::consts::PI * u2;
    Complex64::new(r * th.cos(), r * th.sin())
}

pub fn make_test_signal(kind: &TestSignalKind, grid: &GridSpec) -> Signal {
    match kind {
        TestSignalKind::Gaussian { sigma, center, modulation } => {
            let mut samples = Vec::with_capacity(grid.len());
            for flat in 0..grid.len() {
                let ix = grid.split(flat);
                let mut r2 = 0.0;
                for a in 0..grid.d {
                    let x = grid.axis_x(ix[a]) - center;
                    r2 += x * x;
                }
                let x0 = grid.axis_x(ix[0]);
                let amp = (-r2 / (2.0 * sigma * sigma)).exp();
                let phase = modulation * x0;
                samples.push(Complex64::new(0.0, phase).exp() * amp);
            }
            Signal { grid: *grid, samples }
        }
        TestSignalKind::BumpTrain { centers, weights, widths } => {
            let mut spec = SpectralSignal::zero(*grid);
            for ((c, &w), &width) in centers.iter().zip(weights).zip(widths) {
                for flat in 0..grid.len() {
                    let xi = grid.xi(flat);
                    let mut r2 = 0.0;
                    for a in 0..grid.d {
                        let t = (xi[a] - c[a]) / width;
                        r2 += t * t;
                    }
                    if r2 < 1.0 {
                        spec.coeffs[flat] += w * crate::bapu::bump_chi(r2.sqrt());
                    }
                }
            }
            fft_inverse(&spec)
        }
        TestSignalKind::RandomBandlimited { seed, band_radius } => {
            let mut spec = SpectralSignal::zero(*grid);
            let half = grid.n as i64 / 2;
            for flat in 0..grid.len() {
                if grid.xi_abs(flat) <= *band_radius {
                    let ix = grid.split(flat);
                    let m = [
                        ix[0] as i64 - half,
                        if grid.d == 2 { ix[1] as i64 - half } else { 0 },
                    ];
                    spec.coeffs[flat] = mode_gaussian(*seed, m);
                }
            }
            fft_inverse(&spec)
        }
    }
}

// =====================================================
// I/O
// =====================================================

#[derive(Serialize, Deserialize)]
struct SignalSidecar {
    grid: GridSpec,
    kind: Option<TestSignalKind>,
}

/// Writes interleaved little-endian f64 (re, im) pairs plus a JSON sidecar.
pub fn save_signal(f: &Signal, kind: Option<&TestSignalKind>, path: &Path) -> Result<()> {
    let mut raw = Vec::with_capacity(f.samples.len() * 16);
    for c in &f.samples {
        raw.extend_from_slice(&c.re.to_le_bytes());
        raw.extend_from_slice(&c.im.to_le_bytes());
    }
    std::fs::File::create(path)?.write_all(&raw)?;
    let sidecar = SignalSidecar { grid: f.grid, kind: kind.cloned() };
    let json = serde_json::to_string_pretty(&sidecar)?;
    std::fs::write(path.with_extension("json"), json)?;
    Ok(())
}

pub fn load_signal(path: &Path) -> Result<Signal> {
    let sidecar: SignalSidecar =
        serde_json::from_str(&std::fs::read_to_string(path.with_extension("json"))?)?;
    let mut raw = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut raw)?;
    let expect = sidecar.grid.len() * 16;
    if raw.len() != expect {
        return Err(Error::invalid(format!(
            "signal payload {} bytes, expected {expect}",
            raw.len()
        )));
    }
    let samples = raw
        .chunks_exact(16)
        .map(|b| {
            Complex64::new(
                f64::from_le_bytes(b[0..8].try_into().unwrap()),
                f64::from_le_bytes(b[8..16].try_into().unwrap()),
            )
        })
        .collect();
    Ok(Signal { grid: sidecar.grid, samples })
}

pub const NORM_CSV_HEADER: &str = "alpha,p,q,s,grid,signal_id,norm,n_patches";

pub fn norm_csv_row(
    params: &SpaceParams,
    grid: &GridSpec,
    signal_id: &str,
    norm: f64,
    n_patches: usize,
) -> String {
    format!(
        "{},{},{},{},{}x{}@{},{},{},{}",
        params.alpha,
        params.p,
        params.q,
        params.s,
        grid.d,
        grid.n,
        grid.half_width,
        signal_id,
        norm,
        n_patches
    )
}
