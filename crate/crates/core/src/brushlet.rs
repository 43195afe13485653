//! Brushlet frame over a lattice cube covering: local-cosine atoms w_{n,k}
//! with spectral support in the cube Q_k, the coefficient operator, the
//! weighted mixed-norm sequence space, and the dual-frame reconstruction.
//!
//! The 1-D factor on an interval I = [a, b], μ = b − a, is
//!
//!   ŵ_{n,I}(ξ) = √(2/μ) ĝ((ξ−a)/μ) cos(π(n+1/2)(ξ−a)/μ),
//!
//! the spectral side of √(μ/2) e^{iax} (g(μ(x+e_n)) + g(μ(x−e_n))) with
//! e_n = π(n+1/2)/μ. The bell ĝ = √G is a symmetric plateau profile with
//! ∫G = 1, which makes (w_{n,k})_n orthonormal for fixed k: the odd cosine
//! moments of a profile symmetric about 1/2 vanish.
//!
//! Reconstruction. Cube endpoints are snapped to the spectral lattice, so
//! for each cube the M = μ/Δξ discrete atoms form an exactly complete
//! cosine system on the grid: analysis followed by per-cube synthesis acts
//! as the multiplier ĝ²((ξ−a)/μ). On its plateau ĝ² is the constant
//! h = 1/(1−η), so filtering with a partition of unity subordinate to the
//! plateau regions and dividing by h collapses the telescope:
//! R(Df) = Σ_k ψ_k ĝ_k² f̂ / h = f̂ wherever Σψ_k = 1. The roundtrip is
//! exact to rounding for any band-limited input.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::bapu::Bapu;
use crate::covering::{
    lattice_kmax, lattice_vectors, Covering, CoveringFamily, FrequencyPatch, PatchId, PatchShape,
};
use crate::error::{Error, Result};
use crate::indices::SpaceParams;
use crate::signal::{
    alpha_modulation_norm, fft_inverse, weighted_power_sum, GridSpan, GridSpec, NormRoute, Signal,
    SpectralSignal,
};

// =====================================================
// Bell
// =====================================================

/// Bell profile ĝ = √G with supp ĝ ⊆ [0, 1]: G ramps over [0, η] and
/// [1−η, 1], sits at the constant 1/(1−η) in between, and integrates to 1
/// exactly (the two half-ramps average to η/2 each).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Bell {
    pub eta: f64,
}

impl Bell {
    pub fn new(eta: f64) -> Result<Bell> {
        if !(0.0 < eta && eta <= 0.4) {
            return Err(Error::invalid(format!("bell edge fraction {eta} outside (0, 0.4]")));
        }
        Ok(Bell { eta })
    }

    /// Plateau height of ĝ².
    pub fn plateau_height(&self) -> f64 {
        1.0 / (1.0 - self.eta)
    }

    fn profile(&self, u: f64) -> f64 {
        if u <= 0.0 || u >= 1.0 {
            0.0
        } else if u < self.eta {
            crate::bapu::smooth_step(u / self.eta)
        } else if u > 1.0 - self.eta {
            crate::bapu::smooth_step((1.0 - u) / self.eta)
        } else {
            1.0
        }
    }

    pub fn ghat_sq(&self, u: f64) -> f64 {
        self.profile(u) * self.plateau_height()
    }

    pub fn ghat(&self, u: f64) -> f64 {
        self.ghat_sq(u).sqrt()
    }
}

// =====================================================
// Frame
// =====================================================

/// One axis factor of a cube: the interval I = [a, b].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IntervalSpec {
    pub a: f64,
    pub b: f64,
}

impl IntervalSpec {
    pub fn mu(&self) -> f64 {
        self.b - self.a
    }

    /// e_{n,I} = π(n + 1/2)/μ(I).
    pub fn brushlet_frequency(&self, n: u32) -> f64 {
        std::f64::consts::PI * (n as f64 + 0.5) / self.mu()
    }
}

#[derive(Clone, Debug)]
struct CubeInfo {
    id: PatchId,
    k: Vec<i64>,
    intervals: Vec<IntervalSpec>,
    span: GridSpan,
    /// samples per axis minus one: the interval holds m_len+1 lattice points
    m_len: usize,
}

#[derive(Clone, Debug)]
pub struct BrushletAtom {
    pub n: [u32; 2],
    pub k: Vec<i64>,
    pub intervals: Vec<IntervalSpec>,
    pub samples: Signal,
}

type AtomKey = ([u32; 2], Vec<i64>);

pub struct BrushletFrame {
    grid: GridSpec,
    alpha: f64,
    r: f64,
    bell: Bell,
    covering: Covering,
    dual_bapu: Bapu,
    band_radius: f64,
    cubes: Vec<CubeInfo>,
    cache: Mutex<HashMap<AtomKey, Arc<BrushletAtom>>>,
}

impl BrushletFrame {
    pub fn build(
        grid: &GridSpec,
        alpha: f64,
        r: f64,
        trunc: f64,
        band_radius: f64,
        bell: Bell,
    ) -> Result<BrushletFrame> {
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::invalid(format!("frame needs alpha in [0, 1), got {alpha}")));
        }
        if band_radius > trunc {
            return Err(Error::invalid(format!(
                "band radius {band_radius} exceeds truncation {trunc}"
            )));
        }
        let d = grid.d;
        let dxi = grid.dxi();
        let beta = alpha / (1.0 - alpha);
        let mut patches = Vec::new();
        let mut shrunk = Vec::new();
        let mut cubes = Vec::new();
        for k in lattice_vectors(d, lattice_kmax(beta, r, trunc)) {
            let kn = (k.iter().map(|&a| (a * a) as f64).sum::<f64>()).sqrt();
            let scale = kn.powf(beta);
            // snap to the spectral lattice: centers to the nearest sample,
            // half sides outward so coverage only grows and μ/Δξ ∈ Z
            let center: Vec<f64> = k
                .iter()
                .map(|&a| (a as f64 * scale / dxi).round() * dxi)
                .collect();
            let half = ((r * scale / dxi).floor() + 2.0) * dxi;
            let patch = FrequencyPatch::new(
                PatchId::Lattice(k.clone()),
                PatchShape::Cube { center: center.clone(), half_side: half },
                d,
            );
            if patch.abs_range().0 > trunc {
                continue;
            }
            let reach = center.iter().fold(0.0f64, |m, c| m.max(c.abs())) + half;
            if reach > grid.nyquist_radius() - dxi {
                return Err(Error::GridMismatch(format!(
                    "cube for k = {k:?} reaches {reach}, beyond the Nyquist radius {}",
                    grid.nyquist_radius()
                )));
            }
            let intervals: Vec<IntervalSpec> = center
                .iter()
                .map(|&c| IntervalSpec { a: c - half, b: c + half })
                .collect();
            let m_len = (2.0 * half / dxi).round() as usize;
            let lo_axis = |a: f64| -> usize {
                ((a / dxi) + grid.n as f64 / 2.0).round() as usize
            };
            let span = if d == 1 {
                GridSpan { lo: [lo_axis(intervals[0].a), 0], size: [m_len + 1, 1] }
            } else {
                GridSpan {
                    lo: [lo_axis(intervals[0].a), lo_axis(intervals[1].a)],
                    size: [m_len + 1, m_len + 1],
                }
            };
            shrunk.push(FrequencyPatch::new(
                PatchId::Lattice(k.clone()),
                PatchShape::Cube {
                    center: center.clone(),
                    half_side: half * (1.0 - 2.0 * bell.eta),
                },
                d,
            ));
            cubes.push(CubeInfo { id: patch.id.clone(), k, intervals, span, m_len });
            patches.push(patch);
        }
        let covering = Covering::from_patches(
            d,
            alpha,
            r,
            CoveringFamily::LatticeCube,
            trunc,
            patches,
            None,
        )?;
        let shrunk_cov = Covering::from_patches(
            d,
            alpha,
            r * (1.0 - 2.0 * bell.eta),
            CoveringFamily::LatticeCube,
            band_radius,
            shrunk,
            None,
        )
        .map_err(|e| {
            Error::certification(format!(
                "plateau regions do not cover the band (raise r or lower eta): {e}"
            ))
        })?;
        let dual_bapu = Bapu::build(&shrunk_cov, grid)?;
        cubes.sort_by(|a, b| a.id.cmp(&b.id));
        Ok(BrushletFrame {
            grid: *grid,
            alpha,
            r,
            bell,
            covering,
            dual_bapu,
            band_radius,
            cubes,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn bell(&self) -> &Bell {
        &self.bell
    }

    pub fn covering(&self) -> &Covering {
        &self.covering
    }

    /// The partition of unity defining the dual atoms w̃ = ψ_k(D) w / h.
    pub fn dual_bapu(&self) -> &Bapu {
        &self.dual_bapu
    }

    pub fn band_radius(&self) -> f64 {
        self.band_radius
    }

    pub fn cube_ids(&self) -> Vec<PatchId> {
        self.cubes.iter().map(|c| c.id.clone()).collect()
    }

    pub fn intervals(&self, k: &[i64]) -> Option<Vec<IntervalSpec>> {
        self.cubes
            .iter()
            .find(|c| c.k == k)
            .map(|c| c.intervals.clone())
    }

    /// Discrete atoms per axis for the cube of k (the complete range).
    pub fn atoms_per_axis(&self, k: &[i64]) -> Option<usize> {
        self.cubes.iter().find(|c| c.k == k).map(|c| c.m_len)
    }
}

/// cos(π(n+1/2)·j/m) for n = 0..len via a rotation recurrence, re-synced
/// against libm every 256 steps.
fn cosine_scan(theta: f64, len: usize, mut visit: impl FnMut(usize, f64)) {
    let (ct, st) = (theta.cos(), theta.sin());
    let mut v = (0.5 * theta).cos();
    let mut w = (0.5 * theta).sin();
    for n in 0..len {
        if n % 256 == 255 {
            let ang = (n as f64 + 0.5) * theta;
            v = ang.cos();
            w = ang.sin();
        }
        visit(n, v);
        let nv = v * ct - w * st;
        w = v * st + w * ct;
        v = nv;
    }
}

fn atom_axis_weight(bell: &Bell, mu: f64, j: usize, m: usize) -> f64 {
    (2.0 / mu).sqrt() * bell.ghat(j as f64 / m as f64)
}

// =====================================================
// Coefficients
// =====================================================

/// Key ordered cube-major so iteration groups by k.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CoeffKey {
    pub k: Vec<i64>,
    pub n: [u32; 2],
}

#[derive(Clone, Debug, Default)]
pub struct CoeffArray {
    pub d: usize,
    pub entries: BTreeMap<CoeffKey, Complex64>,
}

impl CoeffArray {
    pub fn l2_sq(&self) -> f64 {
        self.entries.values().map(|c| c.norm_sqr()).sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(if self.d == 1 { "k,n,re,im\n" } else { "k0,k1,n0,n1,re,im\n" });
        for (key, c) in &self.entries {
            if self.d == 1 {
                out.push_str(&format!("{},{},{},{}\n", key.k[0], key.n[0], c.re, c.im));
            } else {
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    key.k[0], key.k[1], key.n[0], key.n[1], c.re, c.im
                ));
            }
        }
        out
    }
}

fn cube_slice(f: &SpectralSignal, cube: &CubeInfo) -> Option<Vec<Complex64>> {
    let mut vals = Vec::with_capacity(cube.span.len());
    let mut any = false;
    for off in 0..cube.span.len() {
        let c = f.coeffs[cube.span.global_flat(&f.grid, off)];
        any |= c != Complex64::new(0.0, 0.0);
        vals.push(c);
    }
    if any {
        Some(vals)
    } else {
        None
    }
}

/// The coefficient operator: c_{n,k} = (f, w_{n,k}), computed as spectral
/// inner products over each cube, for the complete per-cube range
/// n < M = μ/Δξ per axis. On the sampled grid the higher indices alias:
/// they carry exactly zero additional energy.
pub fn analyze(f: &SpectralSignal, frame: &BrushletFrame) -> Result<CoeffArray> {
    if f.grid != frame.grid {
        return Err(Error::GridMismatch("analyze: signal grid differs from frame grid".into()));
    }
    let d = frame.grid.d;
    let dxi = frame.grid.dxi();
    let per_cube: Vec<(usize, Vec<(CoeffKey, Complex64)>)> = frame
        .cubes
        .par_iter()
        .enumerate()
        .filter_map(|(ci, cube)| {
            let slice = cube_slice(f, cube)?;
            let m = cube.m_len;
            let mut out: Vec<(CoeffKey, Complex64)> = Vec::new();
            if d == 1 {
                let mu = cube.intervals[0].mu();
                let mut coeffs = vec![Complex64::new(0.0, 0.0); m];
                for (j, &fj) in slice.iter().enumerate() {
                    let wj = atom_axis_weight(&frame.bell, mu, j, m);
                    if wj == 0.0 || fj == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    let y = fj * wj * dxi;
                    cosine_scan(std::f64::consts::PI * j as f64 / m as f64, m, |n, v| {
                        coeffs[n] += y * v;
                    });
                }
                for (n, c) in coeffs.into_iter().enumerate() {
                    out.push((CoeffKey { k: cube.k.clone(), n: [n as u32, 0] }, c));
                }
            } else {
                let (mu0, mu1) = (cube.intervals[0].mu(), cube.intervals[1].mu());
                let w = m + 1;
                // contract axis 1 first: partial[j0][n1]
                let mut partial = vec![Complex64::new(0.0, 0.0); w * m];
                for j0 in 0..w {
                    for j1 in 0..w {
                        let fj = slice[j0 * w + j1];
                        if fj == Complex64::new(0.0, 0.0) {
                            continue;
                        }
                        let w1 = atom_axis_weight(&frame.bell, mu1, j1, m);
                        if w1 == 0.0 {
                            continue;
                        }
                        let y = fj * w1;
                        let row = &mut partial[j0 * m..(j0 + 1) * m];
                        cosine_scan(std::f64::consts::PI * j1 as f64 / m as f64, m, |n, v| {
                            row[n] += y * v;
                        });
                    }
                }
                let mut coeffs = vec![Complex64::new(0.0, 0.0); m * m];
                for j0 in 0..w {
                    let w0 = atom_axis_weight(&frame.bell, mu0, j0, m);
                    if w0 == 0.0 {
                        continue;
                    }
                    let row = &partial[j0 * m..(j0 + 1) * m];
                    cosine_scan(std::f64::consts::PI * j0 as f64 / m as f64, m, |n0, v| {
                        let scale = w0 * v * dxi * dxi;
                        for n1 in 0..m {
                            coeffs[n0 * m + n1] += row[n1] * scale;
                        }
                    });
                }
                for n0 in 0..m {
                    for n1 in 0..m {
                        out.push((
                            CoeffKey { k: cube.k.clone(), n: [n0 as u32, n1 as u32] },
                            coeffs[n0 * m + n1],
                        ));
                    }
                }
            }
            Some((ci, out))
        })
        .collect();
    let mut entries = BTreeMap::new();
    for (_, list) in per_cube {
        for (k, v) in list {
            entries.insert(k, v);
        }
    }
    Ok(CoeffArray { d, entries })
}

/// The reconstruction operator R c = Σ c_{n,k} w̃_{n,k} with dual atoms
/// w̃ = ψ_k(D) w_{n,k} / h.
pub fn synthesize(c: &CoeffArray, frame: &BrushletFrame) -> Result<Signal> {
    if c.d != frame.grid.d {
        return Err(Error::GridMismatch("synthesize: coefficient dimension mismatch".into()));
    }
    let d = frame.grid.d;
    let h = frame.bell.plateau_height();
    // group entries per cube (BTreeMap is k-major)
    let mut per_cube: BTreeMap<Vec<i64>, Vec<([u32; 2], Complex64)>> = BTreeMap::new();
    for (key, &v) in &c.entries {
        if v != Complex64::new(0.0, 0.0) {
            per_cube.entry(key.k.clone()).or_default().push((key.n, v));
        }
    }
    let jobs: Vec<(&CubeInfo, &Vec<([u32; 2], Complex64)>)> = frame
        .cubes
        .iter()
        .filter_map(|cube| per_cube.get(&cube.k).map(|e| (cube, e)))
        .collect();
    let partials: Vec<(usize, Vec<Complex64>)> = jobs
        .par_iter()
        .enumerate()
        .map(|(order, (cube, entries))| {
            let m = cube.m_len;
            let w = m + 1;
            let vals = if d == 1 {
                let mu = cube.intervals[0].mu();
                let mut coeffs = vec![Complex64::new(0.0, 0.0); m];
                for &(n, v) in entries.iter() {
                    coeffs[n[0] as usize] = v;
                }
                let mut out = vec![Complex64::new(0.0, 0.0); w];
                for (j, slot) in out.iter_mut().enumerate() {
                    let wj = atom_axis_weight(&frame.bell, mu, j, m);
                    if wj == 0.0 {
                        continue;
                    }
                    let mut acc = Complex64::new(0.0, 0.0);
                    cosine_scan(std::f64::consts::PI * j as f64 / m as f64, m, |n, vv| {
                        acc += coeffs[n] * vv;
                    });
                    *slot = acc * wj;
                }
                out
            } else {
                let (mu0, mu1) = (cube.intervals[0].mu(), cube.intervals[1].mu());
                let mut coeffs = vec![Complex64::new(0.0, 0.0); m * m];
                for &(n, v) in entries.iter() {
                    coeffs[n[0] as usize * m + n[1] as usize] = v;
                }
                // axis 0 back-transform: mid[j0][n1]
                let mut mid = vec![Complex64::new(0.0, 0.0); w * m];
                for j0 in 0..w {
                    let w0 = atom_axis_weight(&frame.bell, mu0, j0, m);
                    if w0 == 0.0 {
                        continue;
                    }
                    let row = &mut mid[j0 * m..(j0 + 1) * m];
                    cosine_scan(std::f64::consts::PI * j0 as f64 / m as f64, m, |n0, vv| {
                        let s = vv * w0;
                        for n1 in 0..m {
                            row[n1] += coeffs[n0 * m + n1] * s;
                        }
                    });
                }
                let mut out = vec![Complex64::new(0.0, 0.0); w * w];
                for j0 in 0..w {
                    let row = &mid[j0 * m..(j0 + 1) * m];
                    for j1 in 0..w {
                        let w1 = atom_axis_weight(&frame.bell, mu1, j1, m);
                        if w1 == 0.0 {
                            continue;
                        }
                        let mut acc = Complex64::new(0.0, 0.0);
                        cosine_scan(std::f64::consts::PI * j1 as f64 / m as f64, m, |n1, vv| {
                            acc += row[n1] * vv;
                        });
                        out[j0 * w + j1] = acc * w1;
                    }
                }
                out
            };
            (order, vals)
        })
        .collect();
    let mut spec = SpectralSignal::zero(frame.grid);
    let mut ordered = partials;
    ordered.sort_by_key(|(order, _)| *order);
    for (order, vals) in ordered {
        let (cube, _) = jobs[order];
        let window = frame
            .dual_bapu
            .window(&cube.id)
            .expect("every cube has a dual window");
        for (off, v) in vals.into_iter().enumerate() {
            if v == Complex64::new(0.0, 0.0) {
                continue;
            }
            let flat = cube.span.global_flat(&frame.grid, off);
            let psi = window.value_at(&frame.grid, flat);
            if psi != 0.0 {
                spec.coeffs[flat] += v * (psi / h);
            }
        }
    }
    Ok(fft_inverse(&spec))
}

/// Materialize a single atom on the grid (cached).
pub fn build_atom(frame: &BrushletFrame, n: [u32; 2], k: &[i64]) -> Result<Arc<BrushletAtom>> {
    let key: AtomKey = (n, k.to_vec());
    if let Some(hit) = frame.cache.lock().unwrap().get(&key) {
        return Ok(hit.clone());
    }
    let cube = frame
        .cubes
        .iter()
        .find(|c| c.k == k)
        .ok_or_else(|| Error::invalid(format!("no retained cube for k = {k:?}")))?;
    let m = cube.m_len;
    for a in 0..frame.grid.d {
        if n[a] as usize >= m {
            return Err(Error::invalid(format!(
                "atom index n = {:?} beyond the complete range {m} for k = {k:?}",
                n
            )));
        }
    }
    let mut spec = SpectralSignal::zero(frame.grid);
    for off in 0..cube.span.len() {
        let (j0, j1) = (off / cube.span.size[1], off % cube.span.size[1]);
        let mut val = 1.0;
        for a in 0..frame.grid.d {
            let j = if a == 0 { j0 } else { j1 };
            let mu = cube.intervals[a].mu();
            let axis = atom_axis_weight(&frame.bell, mu, j, m)
                * (std::f64::consts::PI * (n[a] as f64 + 0.5) * j as f64 / m as f64).cos();
            val *= axis;
        }
        if val != 0.0 {
            spec.coeffs[cube.span.global_flat(&frame.grid, off)] = Complex64::new(val, 0.0);
        }
    }
    let atom = Arc::new(BrushletAtom {
        n,
        k: k.to_vec(),
        intervals: cube.intervals.clone(),
        samples: fft_inverse(&spec),
    });
    frame.cache.lock().unwrap().insert(key, atom.clone());
    Ok(atom)
}

// =====================================================
// Sequence norm
// =====================================================

/// Weighted mixed norm: inner l^p over n, outer l^q over k, with the weight
/// ω_k = |k|^{(s + αd(1/2 − 1/p))/(1−α)}.
pub fn sequence_norm(c: &CoeffArray, params: &SpaceParams) -> Result<f64> {
    if params.alpha >= 1.0 {
        return Err(Error::invalid("sequence norm needs alpha < 1"));
    }
    let d = c.d as f64;
    let expo = (params.s + params.alpha * d * (0.5 - params.p.recip_f64()))
        / (1.0 - params.alpha);
    let mut outer: Vec<f64> = Vec::new();
    let mut cur_k: Option<&[i64]> = None;
    let mut bucket: Vec<f64> = Vec::new();
    let flush = |k: Option<&[i64]>, bucket: &mut Vec<f64>, outer: &mut Vec<f64>| {
        if let Some(k) = k {
            let kn = (k.iter().map(|&a| (a * a) as f64).sum::<f64>()).sqrt();
            let weight = kn.powf(expo);
            let inner = weighted_power_sum(bucket.iter().map(|v| v * weight), 1.0, params.p);
            outer.push(inner);
            bucket.clear();
        }
    };
    for (key, v) in &c.entries {
        if cur_k != Some(key.k.as_slice()) {
            flush(cur_k, &mut bucket, &mut outer);
            cur_k = Some(key.k.as_slice());
        }
        bucket.push(v.norm());
    }
    flush(cur_k, &mut bucket, &mut outer);
    Ok(weighted_power_sum(outer.into_iter(), 1.0, params.q))
}

// =====================================================
// Reports
// =====================================================

#[derive(Clone, Debug, Serialize)]
pub struct GramReport {
    pub k: Vec<i64>,
    pub n_checked: usize,
    pub max_offdiag: f64,
    pub diag_min: f64,
    pub diag_max: f64,
}

/// Gram matrix of (w_{n,k})_{n ≤ n_max} for a fixed cube, by spectral
/// quadrature over the cube span.
pub fn gram_report(frame: &BrushletFrame, k: &[i64], n_max: usize) -> Result<GramReport> {
    let cube = frame
        .cubes
        .iter()
        .find(|c| c.k == k)
        .ok_or_else(|| Error::invalid(format!("no retained cube for k = {k:?}")))?;
    if frame.grid.d != 1 {
        return Err(Error::invalid("gram report is a 1-D diagnostic"));
    }
    let m = cube.m_len;
    let count = n_max.min(m);
    let mu = cube.intervals[0].mu();
    let dxi = frame.grid.dxi();
    // atom samples over the span
    let mut atoms = vec![vec![0.0f64; m + 1]; count];
    for j in 0..=m {
        let wj = atom_axis_weight(&frame.bell, mu, j, m);
        if wj == 0.0 {
            continue;
        }
        cosine_scan(std::f64::consts::PI * j as f64 / m as f64, count, |n, v| {
            atoms[n][j] = wj * v;
        });
    }
    let mut max_off = 0.0f64;
    let mut dmin = f64::INFINITY;
    let mut dmax = 0.0f64;
    for a in 0..count {
        for b in a..count {
            let dot: f64 = atoms[a]
                .iter()
                .zip(&atoms[b])
                .map(|(x, y)| x * y)
                .sum::<f64>()
                * dxi;
            if a == b {
                dmin = dmin.min(dot);
                dmax = dmax.max(dot);
            } else {
                max_off = max_off.max(dot.abs());
            }
        }
    }
    Ok(GramReport { k: k.to_vec(), n_checked: count, max_offdiag: max_off, diag_min: dmin, diag_max: dmax })
}

#[derive(Clone, Debug, Serialize)]
pub struct EquivalenceReport {
    pub ratios: Vec<f64>,
    pub min_ratio: f64,
    pub max_ratio: f64,
}

/// Per-signal ratio ‖c‖_m / ‖f‖_M between the coefficient norm and the
/// modulation norm computed through `norm_bapu`.
pub fn frame_norm_equivalence_report(
    frame: &BrushletFrame,
    norm_bapu: &Bapu,
    signals: &[SpectralSignal],
    params: &SpaceParams,
    route: NormRoute,
) -> Result<EquivalenceReport> {
    let mut ratios = Vec::with_capacity(signals.len());
    for f in signals {
        let coeffs = analyze(f, frame)?;
        let seq = sequence_norm(&coeffs, params)?;
        let (norm, _) = alpha_modulation_norm(f, norm_bapu, params, route)?;
        if norm > 0.0 {
            ratios.push(seq / norm);
        }
    }
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let max = ratios.iter().copied().fold(0.0f64, f64::max);
    Ok(EquivalenceReport { ratios, min_ratio: min, max_ratio: max })
}

/// Relative L² roundtrip error ‖R(Df) − f‖ / ‖f‖.
pub fn roundtrip_error(frame: &BrushletFrame, f: &SpectralSignal) -> Result<f64> {
    let coeffs = analyze(f, frame)?;
    let back = synthesize(&coeffs, frame)?;
    let orig = fft_inverse(f);
    let num: f64 = orig
        .samples
        .iter()
        .zip(&back.samples)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let den: f64 = orig.samples.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if den == 0.0 {
        Ok(0.0)
    } else {
        Ok(num / den)
    }
}
