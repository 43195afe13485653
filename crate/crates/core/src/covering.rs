//! Frequency-space coverings: the lattice ball/cube families, the dyadic
//! annuli, and the metric-driven greedy covering, together with their
//! certification (height, eccentricity, measure comparability, coverage),
//! neighbor structure and disjointization.
//!
//! Intersection predicates test for positive-measure overlap (open
//! interiors). Closed patches that merely touch — adjacent dyadic annuli
//! share a sphere — do not count as intersecting, which is what makes the
//! dyadic height come out as 3 and disjointization classes genuinely
//! partition up to null sets. All shape pairs admit closed forms: |x| maps
//! a connected patch onto an interval, so radial tests reduce to interval
//! overlap.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};

/// Index of a covering patch.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatchId {
    /// Lattice vector k ∈ Z^d \ {0} of the ball/cube families.
    Lattice(Vec<i64>),
    /// Radial level j ≥ 0 of the dyadic family.
    Dyadic(u32),
    /// Acceptance order of the greedy metric covering.
    Metric(usize),
    /// Adjoined plateau ball.
    Plateau(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatchShape {
    Ball { center: Vec<f64>, radius: f64 },
    Ball0 { radius: f64 },
    Cube { center: Vec<f64>, half_side: f64 },
    Annulus { inner: f64, outer: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyPatch {
    pub id: PatchId,
    pub shape: PatchShape,
    /// Designated point ξ_Q ∈ Q; defaults to the patch center (for annuli,
    /// the mid-radius point on the first axis).
    pub xi: Vec<f64>,
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl FrequencyPatch {
    pub fn new(id: PatchId, shape: PatchShape, d: usize) -> FrequencyPatch {
        let xi = match &shape {
            PatchShape::Ball { center, .. } | PatchShape::Cube { center, .. } => center.clone(),
            PatchShape::Ball0 { .. } => vec![0.0; d],
            PatchShape::Annulus { inner, outer } => {
                let mut v = vec![0.0; d];
                v[0] = 0.5 * (inner + outer);
                v
            }
        };
        FrequencyPatch { id, shape, xi }
    }

    pub fn xi_abs(&self) -> f64 {
        norm2(&self.xi)
    }

    /// (r_Q, R_Q): radius of the largest inscribed and smallest circumscribed
    /// ball. Exact for every supported shape.
    pub fn inner_outer_radius(&self, d: usize) -> (f64, f64) {
        match &self.shape {
            PatchShape::Ball { radius, .. } | PatchShape::Ball0 { radius } => (*radius, *radius),
            PatchShape::Cube { half_side, .. } => (*half_side, *half_side * (d as f64).sqrt()),
            PatchShape::Annulus { inner, outer } => (0.5 * (outer - inner), *outer),
        }
    }

    /// Lebesgue measure in dimension d.
    pub fn measure(&self, d: usize) -> f64 {
        match &self.shape {
            PatchShape::Ball { radius, .. } | PatchShape::Ball0 { radius } => {
                if d == 1 {
                    2.0 * radius
                } else {
                    std::f64::consts::PI * radius * radius
                }
            }
            PatchShape::Cube { half_side, .. } => (2.0 * half_side).powi(d as i32),
            PatchShape::Annulus { inner, outer } => {
                if d == 1 {
                    2.0 * (outer - inner)
                } else {
                    std::f64::consts::PI * (outer * outer - inner * inner)
                }
            }
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match &self.shape {
            PatchShape::Ball { center, radius } => {
                let mut r2 = 0.0;
                for (a, c) in x.iter().zip(center) {
                    r2 += (a - c) * (a - c);
                }
                r2 <= radius * radius
            }
            PatchShape::Ball0 { radius } => norm2(x) <= *radius,
            PatchShape::Cube { center, half_side } => x
                .iter()
                .zip(center)
                .all(|(a, c)| (a - c).abs() <= *half_side),
            PatchShape::Annulus { inner, outer } => {
                let r = norm2(x);
                *inner <= r && r <= *outer
            }
        }
    }

    /// Range of |x| over the patch (an interval; the patch is connected).
    pub fn abs_range(&self) -> (f64, f64) {
        match &self.shape {
            PatchShape::Ball { center, radius } => {
                let c = norm2(center);
                ((c - radius).max(0.0), c + radius)
            }
            PatchShape::Ball0 { radius } => (0.0, *radius),
            PatchShape::Cube { center, half_side } => {
                let mut lo2 = 0.0;
                let mut hi2 = 0.0;
                for c in center {
                    let l = (c.abs() - half_side).max(0.0);
                    let h = c.abs() + half_side;
                    lo2 += l * l;
                    hi2 += h * h;
                }
                (lo2.sqrt(), hi2.sqrt())
            }
            PatchShape::Annulus { inner, outer } => (*inner, *outer),
        }
    }

    /// Axis-aligned bounding box (lo, hi per axis).
    pub fn bbox(&self, d: usize) -> ([f64; 2], [f64; 2]) {
        let mut lo = [0.0f64; 2];
        let mut hi = [0.0f64; 2];
        match &self.shape {
            PatchShape::Ball { center, radius } => {
                for a in 0..d {
                    lo[a] = center[a] - radius;
                    hi[a] = center[a] + radius;
                }
            }
            PatchShape::Ball0 { radius } => {
                for a in 0..d {
                    lo[a] = -radius;
                    hi[a] = *radius;
                }
            }
            PatchShape::Cube { center, half_side } => {
                for a in 0..d {
                    lo[a] = center[a] - half_side;
                    hi[a] = center[a] + half_side;
                }
            }
            PatchShape::Annulus { outer, .. } => {
                for a in 0..d {
                    lo[a] = -outer;
                    hi[a] = *outer;
                }
            }
        }
        (lo, hi)
    }
}

/// Positive-measure intersection test; exact for every shape pair.
pub fn patches_intersect(a: &FrequencyPatch, b: &FrequencyPatch) -> bool {
    use PatchShape::*;
    fn ball_of(shape: &PatchShape, d: usize) -> Option<(Vec<f64>, f64)> {
        match shape {
            Ball { center, radius } => Some((center.clone(), *radius)),
            Ball0 { radius } => Some((vec![0.0; d], *radius)),
            _ => None,
        }
    }
    let d = a.xi.len();
    match (&a.shape, &b.shape) {
        (Annulus { .. }, _) | (_, Annulus { .. }) => {
            // radial reduction: open interval overlap of |x| ranges
            let (al, ah) = a.abs_range();
            let (bl, bh) = b.abs_range();
            al.max(bl) < ah.min(bh)
        }
        (Cube { center: c1, half_side: h1 }, Cube { center: c2, half_side: h2 }) => (0..d)
            .all(|i| (c1[i] - c2[i]).abs() < h1 + h2),
        _ => {
            let ba = ball_of(&a.shape, d);
            let bb = ball_of(&b.shape, d);
            match (ba, bb) {
                (Some((c1, r1)), Some((c2, r2))) => {
                    let mut dist2 = 0.0;
                    for i in 0..d {
                        dist2 += (c1[i] - c2[i]) * (c1[i] - c2[i]);
                    }
                    dist2.sqrt() < r1 + r2
                }
                (Some((c, r)), None) | (None, Some((c, r))) => {
                    // ball vs cube: clamp ball center into the cube
                    let (cc, h) = match (&a.shape, &b.shape) {
                        (Cube { center, half_side }, _) | (_, Cube { center, half_side }) => {
                            (center.clone(), *half_side)
                        }
                        _ => unreachable!(),
                    };
                    let mut dist2 = 0.0;
                    for i in 0..d {
                        let gap = (c[i] - cc[i]).abs() - h;
                        if gap > 0.0 {
                            dist2 += gap * gap;
                        }
                    }
                    dist2.sqrt() < r
                }
                (None, None) => unreachable!(),
            }
        }
    }
}

// =====================================================
// Bucket index
// =====================================================

pub(crate) struct BucketIndex {
    d: usize,
    cell: f64,
    buckets: HashMap<[i64; 2], Vec<usize>>,
}

impl BucketIndex {
    pub fn build(patches: &[FrequencyPatch], d: usize, cell: f64) -> BucketIndex {
        let mut buckets: HashMap<[i64; 2], Vec<usize>> = HashMap::new();
        for (idx, p) in patches.iter().enumerate() {
            let (lo, hi) = p.bbox(d);
            let c0 = (lo[0] / cell).floor() as i64..=(hi[0] / cell).floor() as i64;
            for i0 in c0 {
                if d == 1 {
                    buckets.entry([i0, 0]).or_default().push(idx);
                } else {
                    let c1 = (lo[1] / cell).floor() as i64..=(hi[1] / cell).floor() as i64;
                    for i1 in c1 {
                        buckets.entry([i0, i1]).or_default().push(idx);
                    }
                }
            }
        }
        BucketIndex { d, cell, buckets }
    }

    pub fn candidates_point(&self, x: &[f64], out: &mut Vec<usize>) {
        out.clear();
        let i0 = (x[0] / self.cell).floor() as i64;
        let i1 = if self.d == 2 { (x[1] / self.cell).floor() as i64 } else { 0 };
        if let Some(v) = self.buckets.get(&[i0, i1]) {
            out.extend_from_slice(v);
        }
    }

    pub fn candidates_bbox(&self, lo: [f64; 2], hi: [f64; 2], out: &mut Vec<usize>) {
        out.clear();
        let r0 = (lo[0] / self.cell).floor() as i64..=(hi[0] / self.cell).floor() as i64;
        for i0 in r0 {
            if self.d == 1 {
                if let Some(v) = self.buckets.get(&[i0, 0]) {
                    out.extend_from_slice(v);
                }
            } else {
                let r1 = (lo[1] / self.cell).floor() as i64..=(hi[1] / self.cell).floor() as i64;
                for i1 in r1 {
                    if let Some(v) = self.buckets.get(&[i0, i1]) {
                        out.extend_from_slice(v);
                    }
                }
            }
        }
        out.sort_unstable();
        out.dedup();
    }
}

fn index_cell(patches: &[FrequencyPatch], d: usize) -> f64 {
    patches
        .iter()
        .map(|p| p.inner_outer_radius(d).0)
        .fold(f64::INFINITY, f64::min)
        .max(1e-3)
}

// =====================================================
// Covering
// =====================================================

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoveringFamily {
    LatticeBall,
    LatticeCube,
    Dyadic,
    Metric,
}

/// Certification data for a covering.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Certificate {
    /// Max number of patches any single patch intersects (itself included).
    pub n0: usize,
    /// Max eccentricity R_Q / r_Q.
    pub k_ratio: f64,
    /// Global extremes and spread of μ(Q)/⟨x⟩^{αd} over patches.
    pub mu_ratio_min: f64,
    pub mu_ratio_max: f64,
    pub mu_spread: f64,
    pub complete: bool,
    pub samples: usize,
    pub uncovered: usize,
}

impl Certificate {
    pub fn pass(&self) -> bool {
        self.complete && self.n0 > 0 && self.k_ratio.is_finite()
    }
}

#[derive(Clone, Debug)]
pub struct Covering {
    d: usize,
    alpha: f64,
    r: f64,
    family: CoveringFamily,
    trunc_radius: f64,
    patches: Vec<FrequencyPatch>,
    certificate: Certificate,
}

impl Covering {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn beta(&self) -> Option<f64> {
        if self.alpha < 1.0 {
            Some(self.alpha / (1.0 - self.alpha))
        } else {
            None
        }
    }

    pub fn family(&self) -> CoveringFamily {
        self.family
    }

    pub fn trunc_radius(&self) -> f64 {
        self.trunc_radius
    }

    pub fn patches(&self) -> &[FrequencyPatch] {
        &self.patches
    }

    pub fn certificate(&self) -> &Certificate {
        &self.certificate
    }

    pub fn patch(&self, id: &PatchId) -> Option<&FrequencyPatch> {
        self.patches.iter().find(|p| &p.id == id)
    }

    /// Replace each ξ_Q by a seeded random interior point of its patch.
    pub fn with_random_xi(&self, seed: u64) -> Covering {
        let mut out = self.clone();
        for (i, p) in out.patches.iter_mut().enumerate() {
            let h = seeded(seed, i as u64);
            p.xi = random_interior_point(&p.shape, self.d, h);
            debug_assert!(p.contains(&p.xi));
        }
        out
    }

    /// Extend by extra patches (plateau adjunction); re-certifies height and
    /// eccentricity, coverage can only improve.
    pub fn extended(&self, extra: Vec<FrequencyPatch>) -> Covering {
        let mut patches = self.patches.clone();
        patches.extend(extra);
        self.with_patches(patches)
    }

    /// Same parameters over a different patch list, re-certified.
    pub fn with_patches(&self, patches: Vec<FrequencyPatch>) -> Covering {
        let certificate = certify_patches(
            &patches,
            self.d,
            self.alpha,
            self.trunc_radius,
            default_density(self.d),
        );
        Covering { patches, certificate, ..self.clone() }
    }

    /// Assemble a covering from explicit patches and certify it; fails on
    /// incomplete coverage of the truncated region.
    pub fn from_patches(
        d: usize,
        alpha: f64,
        r: f64,
        family: CoveringFamily,
        trunc_radius: f64,
        patches: Vec<FrequencyPatch>,
        density: Option<f64>,
    ) -> Result<Covering> {
        let certificate = certify_patches(
            &patches,
            d,
            alpha,
            trunc_radius,
            density.unwrap_or_else(|| default_density(d)),
        );
        if !certificate.complete {
            return Err(Error::certification(format!(
                "{}/{} samples uncovered",
                certificate.uncovered, certificate.samples
            )));
        }
        Ok(Covering { d, alpha, r, family, trunc_radius, patches, certificate })
    }
}

fn seeded(seed: u64, salt: u64) -> u64 {
    let mut x = seed ^ salt.wrapping_mul(0x9E3779B97F4A7C15);
    x ^= x >> 33;
    x = x.wrapping_mul(0xFF51AFD7ED558CCD);
    x ^= x >> 33;
    x
}

fn unit_f64(h: u64) -> f64 {
    (h >> 11) as f64 / (1u64 << 53) as f64
}

fn random_interior_point(shape: &PatchShape, d: usize, h: u64) -> Vec<f64> {
    let u = 0.8 * unit_f64(h); // stay inside by a margin
    let ang = 2.0 * std::f64::consts::PI * unit_f64(h.wrapping_mul(0x2545F4914F6CDD1D));
    match shape {
        PatchShape::Ball { center, radius } => {
            let mut p = center.clone();
            if d == 1 {
                p[0] += radius * u * if ang > std::f64::consts::PI { -1.0 } else { 1.0 };
            } else {
                p[0] += radius * u * ang.cos();
                p[1] += radius * u * ang.sin();
            }
            p
        }
        PatchShape::Ball0 { radius } => {
            let mut p = vec![0.0; d];
            if d == 1 {
                p[0] = radius * u * if ang > std::f64::consts::PI { -1.0 } else { 1.0 };
            } else {
                p[0] = radius * u * ang.cos();
                p[1] = radius * u * ang.sin();
            }
            p
        }
        PatchShape::Cube { center, half_side } => {
            let mut p = center.clone();
            p[0] += half_side * (2.0 * u - 0.8);
            if d == 2 {
                let u2 = 0.8 * unit_f64(h.wrapping_mul(0x9E3779B97F4A7C15));
                p[1] += half_side * (2.0 * u2 - 0.8);
            }
            p
        }
        PatchShape::Annulus { inner, outer } => {
            let rr = inner + (0.1 + 0.8 * u) * (outer - inner);
            let mut p = vec![0.0; d];
            if d == 1 {
                p[0] = rr * if ang > std::f64::consts::PI { -1.0 } else { 1.0 };
            } else {
                p[0] = rr * ang.cos();
                p[1] = rr * ang.sin();
            }
            p
        }
    }
}

pub fn default_density(d: usize) -> f64 {
    if d == 1 {
        64.0
    } else {
        3.0
    }
}

// =====================================================
// Certification
// =====================================================

fn max_intersection_count(patches: &[FrequencyPatch], d: usize) -> usize {
    if patches.is_empty() {
        return 0;
    }
    let index = BucketIndex::build(patches, d, index_cell(patches, d));
    patches
        .par_iter()
        .map(|p| {
            let (lo, hi) = p.bbox(d);
            let mut cand = Vec::new();
            index.candidates_bbox(lo, hi, &mut cand);
            cand.iter()
                .filter(|&&j| patches_intersect(p, &patches[j]))
                .count()
        })
        .max()
        .unwrap_or(0)
}

fn coverage_check(
    patches: &[FrequencyPatch],
    d: usize,
    trunc: f64,
    density: f64,
) -> (usize, usize) {
    if trunc <= 0.0 {
        return (0, 0);
    }
    let index = BucketIndex::build(patches, d, index_cell(patches, d));
    let steps = ((2.0 * trunc * density).ceil() as usize).max(2);
    let h = 2.0 * trunc / steps as f64;
    let line: Vec<f64> = (0..=steps).map(|i| -trunc + i as f64 * h).collect();
    if d == 1 {
        let uncovered = line
            .par_iter()
            .filter(|&&x| {
                let mut cand = Vec::new();
                index.candidates_point(&[x], &mut cand);
                !cand.iter().any(|&j| patches[j].contains(&[x]))
            })
            .count();
        (line.len(), uncovered)
    } else {
        let counts: Vec<(usize, usize)> = line
            .par_iter()
            .map(|&x| {
                let mut cand = Vec::new();
                let mut total = 0;
                let mut bad = 0;
                for &y in &line {
                    if x * x + y * y <= trunc * trunc {
                        total += 1;
                        index.candidates_point(&[x, y], &mut cand);
                        if !cand.iter().any(|&j| patches[j].contains(&[x, y])) {
                            bad += 1;
                        }
                    }
                }
                (total, bad)
            })
            .collect();
        let total = counts.iter().map(|c| c.0).sum();
        let bad = counts.iter().map(|c| c.1).sum();
        (total, bad)
    }
}

fn certify_patches(
    patches: &[FrequencyPatch],
    d: usize,
    alpha: f64,
    trunc: f64,
    density: f64,
) -> Certificate {
    let n0 = max_intersection_count(patches, d);
    let mut k_ratio = 1.0f64;
    let mut mu_min = f64::INFINITY;
    let mut mu_max = 0.0f64;
    for p in patches {
        let (rq, bigr) = p.inner_outer_radius(d);
        if rq > 0.0 {
            k_ratio = k_ratio.max(bigr / rq);
        }
        let mu = p.measure(d);
        let (lo, hi) = p.abs_range();
        let wlo = (1.0 + lo * lo).powf(0.5 * alpha * d as f64);
        let whi = (1.0 + hi * hi).powf(0.5 * alpha * d as f64);
        // μ(Q)/⟨x⟩^{αd} is monotone in |x|, so its range over Q is exact
        mu_min = mu_min.min(mu / whi);
        mu_max = mu_max.max(mu / wlo);
    }
    let (samples, uncovered) = coverage_check(patches, d, trunc, density);
    Certificate {
        n0,
        k_ratio,
        mu_ratio_min: mu_min,
        mu_ratio_max: mu_max,
        mu_spread: if mu_min > 0.0 { mu_max / mu_min } else { f64::INFINITY },
        complete: uncovered == 0,
        samples,
        uncovered,
    }
}

/// Re-run certification at a chosen sampling density.
pub fn certify_alpha_covering(cov: &Covering, density: f64) -> Certificate {
    certify_patches(&cov.patches, cov.d, cov.alpha, cov.trunc_radius, density)
}

// =====================================================
// Builders
// =====================================================

pub(crate) fn lattice_vectors(d: usize, k_max: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    if d == 1 {
        for k in -k_max..=k_max {
            if k != 0 {
                out.push(vec![k]);
            }
        }
    } else {
        for k0 in -k_max..=k_max {
            for k1 in -k_max..=k_max {
                if k0 != 0 || k1 != 0 {
                    out.push(vec![k0, k1]);
                }
            }
        }
    }
    out.sort();
    out
}

pub(crate) fn lattice_kmax(beta: f64, r: f64, trunc: f64) -> i64 {
    // smallest ring with |center| − radius > trunc, plus one for safety
    let mut k = 1.0f64;
    while k.powf(beta + 1.0) - r * k.powf(beta) <= trunc && k < 1e7 {
        k += 1.0;
    }
    k as i64 + 1
}

fn build_lattice_family(
    d: usize,
    alpha: f64,
    r: f64,
    trunc: f64,
    cubes: bool,
    density: f64,
) -> Result<Covering> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::invalid(format!(
            "alpha = {alpha} not in [0, 1); use the dyadic family for alpha = 1"
        )));
    }
    if !(r > 0.0) {
        return Err(Error::invalid(format!("scale r = {r} must be positive")));
    }
    let beta = alpha / (1.0 - alpha);
    let mut patches = Vec::new();
    for k in lattice_vectors(d, lattice_kmax(beta, r, trunc)) {
        let kn = (k.iter().map(|&a| (a * a) as f64).sum::<f64>()).sqrt();
        let scale = kn.powf(beta);
        let center: Vec<f64> = k.iter().map(|&a| a as f64 * scale).collect();
        let shape = if cubes {
            PatchShape::Cube { center, half_side: r * scale }
        } else {
            PatchShape::Ball { center, radius: r * scale }
        };
        let patch = FrequencyPatch::new(PatchId::Lattice(k), shape, d);
        if patch.abs_range().0 <= trunc {
            patches.push(patch);
        }
    }
    let certificate = certify_patches(&patches, d, alpha, trunc, density);
    if !certificate.complete {
        return Err(Error::certification(format!(
            "lattice covering (alpha {alpha}, r {r}) leaves {}/{} samples uncovered",
            certificate.uncovered, certificate.samples
        )));
    }
    Ok(Covering {
        d,
        alpha,
        r,
        family: if cubes { CoveringFamily::LatticeCube } else { CoveringFamily::LatticeBall },
        trunc_radius: trunc,
        patches,
        certificate,
    })
}

/// B_k = B(k|k|^β, r|k|^β), k ∈ Z^d \ {0}, β = α/(1−α).
pub fn build_ball_covering(d: usize, alpha: f64, r: f64, trunc: f64) -> Result<Covering> {
    build_lattice_family(d, alpha, r, trunc, false, default_density(d))
}

/// Q_k = Q(k|k|^β, r|k|^β); the support cubes of the brushlet frame.
pub fn build_cube_covering(d: usize, alpha: f64, r: f64, trunc: f64) -> Result<Covering> {
    build_lattice_family(d, alpha, r, trunc, true, default_density(d))
}

/// Default scale 2√d; if certification fails, search the smallest passing
/// r in [√d, 8√d].
pub fn build_ball_covering_default(d: usize, alpha: f64, trunc: f64) -> Result<Covering> {
    let sd = (d as f64).sqrt();
    match build_ball_covering(d, alpha, 2.0 * sd, trunc) {
        Ok(c) => Ok(c),
        Err(e @ Error::InvalidParameter(_)) => Err(e),
        Err(_) => {
            let mut lo = sd;
            let mut hi = 8.0 * sd;
            if build_ball_covering(d, alpha, hi, trunc).is_err() {
                return Err(Error::certification(format!(
                    "no passing r in [{lo}, {hi}] for alpha = {alpha}, d = {d}"
                )));
            }
            for _ in 0..20 {
                let mid = 0.5 * (lo + hi);
                if build_ball_covering(d, alpha, mid, trunc).is_ok() {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            build_ball_covering(d, alpha, hi, trunc)
        }
    }
}

/// D_0 = B(0,1), D_j = {2^{j−2} ≤ |ξ| ≤ 2^j} up to the smallest level with
/// 2^j ≥ trunc. A 1-covering.
pub fn build_dyadic_covering(d: usize, trunc: f64) -> Result<Covering> {
    if !(trunc >= 1.0) {
        return Err(Error::invalid(format!("truncation {trunc} below the core ball")));
    }
    let mut patches = vec![FrequencyPatch::new(
        PatchId::Dyadic(0),
        PatchShape::Ball0 { radius: 1.0 },
        d,
    )];
    let mut j = 1u32;
    loop {
        let outer = 2.0f64.powi(j as i32);
        patches.push(FrequencyPatch::new(
            PatchId::Dyadic(j),
            PatchShape::Annulus { inner: 2.0f64.powi(j as i32 - 2), outer },
            d,
        ));
        if outer >= trunc {
            break;
        }
        j += 1;
    }
    let certificate = certify_patches(&patches, d, 1.0, trunc, default_density(d));
    if !certificate.complete {
        return Err(Error::certification("dyadic covering incomplete"));
    }
    Ok(Covering {
        d,
        alpha: 1.0,
        r: 1.0,
        family: CoveringFamily::Dyadic,
        trunc_radius: trunc,
        patches,
        certificate,
    })
}

fn bracket(x: f64) -> f64 {
    (1.0 + x * x).sqrt()
}

/// Greedy maximal net at quarter-radius scale: scan candidate centers by
/// increasing |ξ| and accept those not yet inside an accepted quarter-ball
/// B(ξ_j, r⟨ξ_j⟩^α/4). The accepted half-balls B(ξ_i, r⟨ξ_i⟩^α/2) are the
/// covering; construction fails if sampling finds an uncovered point.
pub fn build_metric_covering(d: usize, alpha: f64, r: f64, trunc: f64) -> Result<Covering> {
    if !(0.0 < r && r < 1.0) {
        return Err(Error::invalid(format!("metric covering needs 0 < r < 1, got {r}")));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid(format!("alpha = {alpha} outside [0, 1]")));
    }
    let margin = trunc + r * bracket(trunc).powf(alpha);
    let mut candidates: Vec<[f64; 2]> = Vec::new();
    if d == 1 {
        let mut x = 0.0f64;
        candidates.push([0.0, 0.0]);
        while x <= margin {
            x += r * bracket(x).powf(alpha) / 16.0;
            candidates.push([x, 0.0]);
            candidates.push([-x, 0.0]);
        }
    } else {
        candidates.push([0.0, 0.0]);
        let mut rho = 0.0f64;
        while rho <= margin {
            let step = r * bracket(rho).powf(alpha) / 8.0;
            rho += step;
            let count = ((2.0 * std::f64::consts::PI * rho / step).ceil() as usize).max(4);
            for t in 0..count {
                let ang = 2.0 * std::f64::consts::PI * t as f64 / count as f64;
                candidates.push([rho * ang.cos(), rho * ang.sin()]);
            }
        }
    }

    // accepted centers in a coarse hash grid for rejection queries
    let cell = r / 4.0;
    let mut accepted: Vec<[f64; 2]> = Vec::new();
    let mut grid: HashMap<[i64; 2], Vec<usize>> = HashMap::new();
    let key = |p: &[f64; 2]| -> [i64; 2] {
        [(p[0] / cell).floor() as i64, if d == 2 { (p[1] / cell).floor() as i64 } else { 0 }]
    };
    'cand: for c in &candidates {
        let qr = 0.5 * r * bracket((c[0] * c[0] + c[1] * c[1]).sqrt()).powf(alpha) + cell;
        let k0 = ((c[0] - qr) / cell).floor() as i64..=((c[0] + qr) / cell).floor() as i64;
        for i0 in k0 {
            let k1 = if d == 2 {
                ((c[1] - qr) / cell).floor() as i64..=((c[1] + qr) / cell).floor() as i64
            } else {
                0..=0
            };
            for i1 in k1 {
                if let Some(ids) = grid.get(&[i0, i1]) {
                    for &j in ids {
                        let a = &accepted[j];
                        let dist = ((c[0] - a[0]).powi(2) + (c[1] - a[1]).powi(2)).sqrt();
                        let rej = 0.25 * r * bracket((a[0] * a[0] + a[1] * a[1]).sqrt()).powf(alpha);
                        if dist <= rej {
                            continue 'cand;
                        }
                    }
                }
            }
        }
        grid.entry(key(c)).or_default().push(accepted.len());
        accepted.push(*c);
    }

    let patches: Vec<FrequencyPatch> = accepted
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let center: Vec<f64> = (0..d).map(|a| c[a]).collect();
            let radius = 0.5 * r * bracket(norm2(&center)).powf(alpha);
            FrequencyPatch::new(PatchId::Metric(i), PatchShape::Ball { center, radius }, d)
        })
        .filter(|p| p.abs_range().0 <= trunc)
        .collect();

    let density = if d == 1 { (64.0f64).max(16.0 / r) } else { 4.0f64.max(8.0 / r) };
    let certificate = certify_patches(&patches, d, alpha, trunc, density);
    if !certificate.complete {
        return Err(Error::certification(format!(
            "metric covering (alpha {alpha}, r {r}) leaves {}/{} samples uncovered",
            certificate.uncovered, certificate.samples
        )));
    }
    Ok(Covering {
        d,
        alpha,
        r,
        family: CoveringFamily::Metric,
        trunc_radius: trunc,
        patches,
        certificate,
    })
}

// =====================================================
// Neighbor structure
// =====================================================

/// Intersection incidence between an α₁-covering {Q_j} and an α₂-covering
/// {P_i}: Ω_i collects the α₁ patches meeting P_i, Λ_j the α₂ patches
/// meeting Q_j.
#[derive(Clone, Debug)]
pub struct NeighborMap {
    pub omega: BTreeMap<PatchId, BTreeSet<PatchId>>,
    pub lambda: BTreeMap<PatchId, BTreeSet<PatchId>>,
}

pub fn neighbor_map(cov1: &Covering, cov2: &Covering) -> Result<NeighborMap> {
    if cov1.alpha > cov2.alpha + 1e-12 {
        return Err(Error::invalid(format!(
            "neighbor map expects alpha1 <= alpha2, got {} > {}",
            cov1.alpha, cov2.alpha
        )));
    }
    if (cov1.trunc_radius - cov2.trunc_radius).abs() > 1e-9 {
        return Err(Error::invalid(format!(
            "coverings truncated at different radii: {} vs {}",
            cov1.trunc_radius, cov2.trunc_radius
        )));
    }
    let d = cov1.d;
    let index = BucketIndex::build(&cov1.patches, d, index_cell(&cov1.patches, d));
    let mut omega: BTreeMap<PatchId, BTreeSet<PatchId>> = BTreeMap::new();
    let mut lambda: BTreeMap<PatchId, BTreeSet<PatchId>> = BTreeMap::new();
    for p in &cov1.patches {
        lambda.entry(p.id.clone()).or_default();
    }
    let hits: Vec<(PatchId, Vec<PatchId>)> = cov2
        .patches
        .par_iter()
        .map(|pi| {
            let (lo, hi) = pi.bbox(d);
            let mut cand = Vec::new();
            index.candidates_bbox(lo, hi, &mut cand);
            let mut found = Vec::new();
            for &j in &cand {
                if patches_intersect(pi, &cov1.patches[j]) {
                    found.push(cov1.patches[j].id.clone());
                }
            }
            (pi.id.clone(), found)
        })
        .collect();
    for (i_id, js) in hits {
        let entry = omega.entry(i_id.clone()).or_default();
        for j in js {
            entry.insert(j.clone());
            lambda.entry(j).or_default().insert(i_id.clone());
        }
    }
    Ok(NeighborMap { omega, lambda })
}

/// Counting-lemma statistics of a neighbor map.
#[derive(Clone, Debug, Serialize)]
pub struct CountingStats {
    pub max_omega: usize,
    /// max_i |Ω_i| / ⟨ξ_i⟩^{d(α₂−α₁)}
    pub max_omega_scaled: f64,
    pub max_lambda: usize,
    /// max over i, j ∈ Ω_i of the two-sided ratio ⟨ξ_i⟩/⟨η_j⟩.
    pub weight_comparability: f64,
}

pub fn counting_stats(cov1: &Covering, cov2: &Covering, nm: &NeighborMap) -> CountingStats {
    let gap = cov1.d as f64 * (cov2.alpha - cov1.alpha);
    let mut max_omega = 0usize;
    let mut max_scaled = 0.0f64;
    let mut comp = 1.0f64;
    for p in &cov2.patches {
        let set = match nm.omega.get(&p.id) {
            Some(s) => s,
            None => continue,
        };
        max_omega = max_omega.max(set.len());
        let w = bracket(p.xi_abs()).powf(gap);
        max_scaled = max_scaled.max(set.len() as f64 / w);
        let wi = bracket(p.xi_abs());
        for j in set {
            if let Some(q) = cov1.patch(j) {
                let wj = bracket(q.xi_abs());
                comp = comp.max((wi / wj).max(wj / wi));
            }
        }
    }
    let max_lambda = nm.lambda.values().map(|s| s.len()).max().unwrap_or(0);
    CountingStats {
        max_omega,
        max_omega_scaled: max_scaled,
        max_lambda,
        weight_comparability: comp,
    }
}

// =====================================================
// Disjointization
// =====================================================

/// Greedy coloring of the patch intersection graph; within each class the
/// patches are pairwise disjoint (up to null sets, matching the
/// intersection predicate).
pub fn disjointize(cov: &Covering) -> Vec<Vec<PatchId>> {
    let d = cov.d;
    let patches = &cov.patches;
    if patches.is_empty() {
        return Vec::new();
    }
    let index = BucketIndex::build(patches, d, index_cell(patches, d));
    let mut color = vec![usize::MAX; patches.len()];
    let mut n_classes = 0usize;
    let mut cand = Vec::new();
    for (i, p) in patches.iter().enumerate() {
        let (lo, hi) = p.bbox(d);
        index.candidates_bbox(lo, hi, &mut cand);
        let mut used: Vec<bool> = vec![false; n_classes + 1];
        for &j in &cand {
            if j != i && color[j] != usize::MAX && patches_intersect(p, &patches[j]) {
                if color[j] < used.len() {
                    used[color[j]] = true;
                }
            }
        }
        let c = used.iter().position(|&u| !u).unwrap_or(n_classes);
        color[i] = c;
        n_classes = n_classes.max(c + 1);
    }
    let mut classes = vec![Vec::new(); n_classes];
    for (i, p) in patches.iter().enumerate() {
        classes[color[i]].push(p.id.clone());
    }
    classes
}

// =====================================================
// JSON export
// =====================================================

#[derive(Serialize)]
struct PatchDto<'a> {
    id: &'a PatchId,
    shape: &'a PatchShape,
    xi: &'a [f64],
}

#[derive(Serialize)]
struct CertificateDto {
    n0: usize,
    #[serde(rename = "K")]
    k: f64,
    ratio_spread: f64,
}

#[derive(Serialize)]
struct CoveringDto<'a> {
    alpha: f64,
    r: f64,
    d: usize,
    trunc_radius: f64,
    patches: Vec<PatchDto<'a>>,
    certificate: CertificateDto,
}

impl Covering {
    pub fn to_json(&self) -> Result<String> {
        let dto = CoveringDto {
            alpha: self.alpha,
            r: self.r,
            d: self.d,
            trunc_radius: self.trunc_radius,
            patches: self
                .patches
                .iter()
                .map(|p| PatchDto { id: &p.id, shape: &p.shape, xi: &p.xi })
                .collect(),
            certificate: CertificateDto {
                n0: self.certificate.n0,
                k: self.certificate.k_ratio,
                ratio_spread: self.certificate.mu_spread,
            },
        };
        Ok(serde_json::to_string_pretty(&dto)?)
    }

    pub fn write_json(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_covering_alpha0_is_unit_lattice() {
        let cov = build_ball_covering(1, 0.0, 1.0, 10.0).unwrap();
        for p in cov.patches() {
            if let PatchShape::Ball { center, radius } = &p.shape {
                assert_eq!(*radius, 1.0);
                assert_eq!(center[0], center[0].round());
            } else {
                panic!("expected balls");
            }
        }
        assert_eq!(cov.certificate().n0, 3);
    }

    #[test]
    fn ball_covering_alpha_half_patch() {
        // β = 1: the k = 2 patch is B(4, 2)
        let cov = build_ball_covering(1, 0.5, 1.0, 30.0).unwrap();
        let p = cov.patch(&PatchId::Lattice(vec![2])).unwrap();
        match &p.shape {
            PatchShape::Ball { center, radius } => {
                assert!((center[0] - 4.0).abs() < 1e-12);
                assert!((radius - 2.0).abs() < 1e-12);
            }
            _ => panic!(),
        }
    }

    #[test]
    fn cube_covering_alpha0() {
        let cov = build_cube_covering(1, 0.0, 1.0, 10.0).unwrap();
        let p = cov.patch(&PatchId::Lattice(vec![3])).unwrap();
        match &p.shape {
            PatchShape::Cube { center, half_side } => {
                assert_eq!(center[0], 3.0);
                assert_eq!(*half_side, 1.0);
            }
            _ => panic!(),
        }
        let (rq, brq) = p.inner_outer_radius(1);
        assert_eq!((rq, brq), (1.0, 1.0));
        // d=2 circumscribed radius is h√2
        let q = FrequencyPatch::new(
            PatchId::Lattice(vec![0, 1]),
            PatchShape::Cube { center: vec![0.0, 1.0], half_side: 2.0 },
            2,
        );
        let (rq2, brq2) = q.inner_outer_radius(2);
        assert_eq!(rq2, 2.0);
        assert!((brq2 - 2.0 * 2.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn certified_2d_coverings() {
        let cov = build_ball_covering(2, 0.5, 2.0, 50.0).unwrap();
        assert!(cov.certificate().complete);
        let cov = build_cube_covering(2, 1.0 / 3.0, 2.0, 40.0).unwrap();
        assert!(cov.certificate().complete);
    }

    #[test]
    fn dyadic_structure() {
        let cov = build_dyadic_covering(1, 100.0).unwrap();
        let p = cov.patch(&PatchId::Dyadic(3)).unwrap();
        assert_eq!(p.shape, PatchShape::Annulus { inner: 2.0, outer: 8.0 });
        // j=1 and j=2 overlap on [1, 2]
        let p1 = cov.patch(&PatchId::Dyadic(1)).unwrap();
        let p2 = cov.patch(&PatchId::Dyadic(2)).unwrap();
        assert!(patches_intersect(p1, p2));
        // annuli two levels apart only touch at a sphere
        assert!(!patches_intersect(p1, p));
        assert_eq!(cov.certificate().n0, 3);
        // annulus inner/outer radii
        let (rq, brq) = p.inner_outer_radius(1);
        assert_eq!((rq, brq), (3.0, 8.0));
    }

    #[test]
    fn metric_covering_gaps() {
        let cov = build_metric_covering(1, 0.0, 0.5, 30.0).unwrap();
        let mut centers: Vec<f64> = cov
            .patches()
            .iter()
            .map(|p| match &p.shape {
                PatchShape::Ball { center, .. } => center[0],
                _ => panic!(),
            })
            .collect();
        centers.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for w in centers.windows(2) {
            let gap = w[1] - w[0];
            assert!(
                (0.125..=0.25).contains(&gap),
                "gap {gap} outside [1/8, 1/4]"
            );
        }
        for p in cov.patches() {
            let (rq, brq) = p.inner_outer_radius(1);
            assert_eq!(rq, brq);
        }
        assert!(cov.certificate().complete);
    }

    #[test]
    fn empty_truncation_trivially_complete() {
        let cov = build_ball_covering(1, 0.0, 1.0, 0.0).unwrap();
        assert!(cov.certificate().complete);
        assert_eq!(cov.certificate().samples, 0);
    }

    #[test]
    fn mu_spread_alpha_half() {
        let cov = build_ball_covering(1, 0.5, 2.0, 200.0).unwrap();
        let cert = cov.certificate();
        assert!(cert.mu_spread <= 16.0, "spread {}", cert.mu_spread);
    }

    #[test]
    fn lattice_vs_dyadic_counting() {
        let t = 200.0;
        let lat = build_ball_covering(1, 0.0, 1.0, t).unwrap();
        let dy = build_dyadic_covering(1, t).unwrap();
        let nm = neighbor_map(&lat, &dy).unwrap();
        // symmetry
        for (i, js) in &nm.omega {
            for j in js {
                assert!(nm.lambda[j].contains(i));
            }
        }
        // |Ω_j| grows like 2^j: compare against direct enumeration
        for j in [4u32, 5, 6] {
            let inner = 2.0f64.powi(j as i32 - 2);
            let outer = 2.0f64.powi(j as i32);
            let mut count = 0usize;
            for k in -(t as i64 + 2)..=(t as i64 + 2) {
                if k == 0 {
                    continue;
                }
                let lo = (k as f64 - 1.0).abs().min((k as f64 + 1.0).abs());
                let lo = if (k as f64 - 1.0) * (k as f64 + 1.0) < 0.0 { 0.0 } else { lo };
                let hi = (k as f64 - 1.0).abs().max((k as f64 + 1.0).abs());
                if lo.max(inner) < hi.min(outer) {
                    count += 1;
                }
            }
            assert_eq!(nm.omega[&PatchId::Dyadic(j)].len(), count);
        }
        let stats = counting_stats(&lat, &dy, &nm);
        assert!(stats.max_lambda <= 4, "max lambda {}", stats.max_lambda);
    }

    #[test]
    fn identical_coverings_self_neighbor() {
        let cov = build_ball_covering(1, 0.5, 2.0, 50.0).unwrap();
        let nm = neighbor_map(&cov, &cov).unwrap();
        for p in cov.patches() {
            assert!(nm.omega[&p.id].contains(&p.id));
        }
    }

    #[test]
    fn disjointize_families() {
        let lat = build_ball_covering(1, 0.0, 1.0, 30.0).unwrap();
        let classes = disjointize(&lat);
        assert!(classes.len() <= 3, "lattice used {} classes", classes.len());
        let dy = build_dyadic_covering(1, 100.0).unwrap();
        let dyc = disjointize(&dy);
        assert!(dyc.len() <= 3, "dyadic used {} classes", dyc.len());
        // exact pairwise disjointness within a class
        for cov in [&lat, &dy] {
            for class in disjointize(cov) {
                for (a, ida) in class.iter().enumerate() {
                    for idb in class.iter().skip(a + 1) {
                        let pa = cov.patch(ida).unwrap();
                        let pb = cov.patch(idb).unwrap();
                        assert!(!patches_intersect(pa, pb));
                    }
                }
            }
        }
        // single-patch covering
        let single = Covering {
            d: 1,
            alpha: 0.0,
            r: 1.0,
            family: CoveringFamily::LatticeBall,
            trunc_radius: 0.0,
            patches: vec![FrequencyPatch::new(
                PatchId::Lattice(vec![1]),
                PatchShape::Ball { center: vec![1.0], radius: 1.0 },
                1,
            )],
            certificate: certify_patches(&[], 1, 0.0, 0.0, 1.0),
        };
        assert_eq!(disjointize(&single).len(), 1);
    }

    #[test]
    fn stability_under_truncation_doubling() {
        for alpha in [0.0, 0.5] {
            let a = build_ball_covering(1, alpha, 2.0, 50.0).unwrap();
            let b = build_ball_covering(1, alpha, 2.0, 100.0).unwrap();
            assert_eq!(a.certificate().n0, b.certificate().n0);
            assert_eq!(a.certificate().k_ratio, b.certificate().k_ratio);
        }
    }

    #[test]
    fn json_export_shape() {
        let cov = build_ball_covering(1, 0.0, 1.0, 5.0).unwrap();
        let text = cov.to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["alpha"], 0.0);
        assert!(v["certificate"]["n0"].is_u64());
        assert!(v["patches"].as_array().unwrap().len() >= 8);
    }

    #[test]
    fn random_xi_stays_inside() {
        let cov = build_ball_covering(1, 0.5, 2.0, 80.0).unwrap().with_random_xi(11);
        for p in cov.patches() {
            assert!(p.contains(&p.xi));
        }
    }
}
