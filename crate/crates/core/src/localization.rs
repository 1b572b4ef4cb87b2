//! Frame matrix coefficients of kernel operators, the four-regime decay
//! majorant, weighted Schur functionals, and the weak-compactness profile.
//!
//! Coefficients `⟨T ψ_{g'}, ψ_g⟩` are computed through the conjugation
//! identity `⟨T ψ_{g'}, ψ_g⟩ = ⟨T_{g'} ψ, ψ_{g'^{-1} g}⟩`: the conjugated
//! kernel is applied to the mother wavelet once, on a lattice wide enough
//! for every frame element, and the result is analyzed against the whole
//! lattice. With the weight `w(a, b) = a^{1/2}` the Schur integrand at an
//! anchor becomes `|⟨T_{g'} ψ, ψ_{g''}⟩| w(g'')` over the reduced lattice.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::grid::{LatticeSamples, SpatialGrid};
use crate::group::{dist, GroupPoint};
use crate::operators::{apply_lattice, double_sum, CzKernel};
use crate::wavelet::{lattice_pair, CoefficientField, Dictionary, WaveletFamily};

/// Four-regime majorant `C · {a^{-(1/2+δ)}, a^{1/2}|b|^{-(1+δ)}, a^{1/2+δ}, a^{1/2+δ}|b|^{-(1+δ)}}`
/// in dimension one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayBound {
    pub delta: f64,
    pub c: f64,
}

impl DecayBound {
    pub fn new(delta: f64, c: f64) -> Self {
        Self { delta, c }
    }

    pub fn eval(&self, a: f64, b: f64) -> f64 {
        lemma_bound(self, a, b)
    }
}

pub fn lemma_bound(d: &DecayBound, a: f64, b: f64) -> f64 {
    let (n, delta) = (1.0, d.delta);
    let b = b.abs();
    let v = if a >= 1.0 {
        if b <= a {
            a.powf(-(n / 2.0 + delta))
        } else {
            a.powf(n / 2.0) / b.powf(n + delta)
        }
    } else if b <= 1.0 {
        a.powf(n / 2.0 + delta)
    } else {
        a.powf(n / 2.0 + delta) / b.powf(n + delta)
    };
    d.c * v
}

/// `w(a, b) = a^{1/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalizationWeight;

impl LocalizationWeight {
    pub fn eval(&self, a: f64, _b: f64) -> f64 {
        a.sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoefficientPath {
    /// Plain double sum over disjoint supports.
    Direct,
    /// Principal-value application followed by pairing.
    Apply,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatrixCoefficient {
    pub value: f64,
    pub path: CoefficientPath,
    /// One of the two elements has scale below `2h`.
    pub under_resolved: bool,
}

/// `⟨T ψ_{g'}, ψ_g⟩` on the lattice of `grid`.
pub fn matrix_coefficient(
    kernel: &CzKernel,
    psi: WaveletFamily,
    grid: &SpatialGrid,
    source: GroupPoint,
    target: GroupPoint,
) -> MatrixCoefficient {
    let under_resolved = source.a().min(target.a()) < 2.0 * grid.spacing();
    let es = psi.element(source, grid);
    let et = psi.element(target, grid);
    let separated = es.end() < et.start || et.end() < es.start;
    if separated {
        MatrixCoefficient {
            value: double_sum(kernel, grid, &es, &et),
            path: CoefficientPath::Direct,
            under_resolved,
        }
    } else {
        MatrixCoefficient {
            value: apply_path(kernel, grid, &es, &et),
            path: CoefficientPath::Apply,
            under_resolved,
        }
    }
}

/// The apply-then-pair path, usable for any pair of supports.
pub fn apply_path(kernel: &CzKernel, grid: &SpatialGrid, src: &LatticeSamples, target: &LatticeSamples) -> f64 {
    let u = apply_lattice(kernel, grid, src, target.start, target.end() - 1);
    lattice_pair(&u, target) * grid.spacing()
}

/// Reduced coefficient field `g'' ↦ ⟨T_{g'} ψ, ψ_{g''}⟩` at the anchor `g'`.
pub fn anchor_field(kernel: &CzKernel, dict: &Dictionary, anchor: GroupPoint) -> CoefficientField {
    let grid = dict.spatial();
    let kc = kernel.conjugate(anchor);
    let src = dict.family().element(GroupPoint::IDENTITY, grid);
    let (lo, hi) = dict.lattice_span();
    let u = apply_lattice(&kc, grid, &src, lo, hi);
    dict.analyze_lattice(&u)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Smallest `C` with `|coeff| <= C · bound` on every node.
    pub c: f64,
    pub argmax: (f64, f64),
    /// Node counts per decade of `ratio`, from `10^-12` up to `10^2`.
    pub histogram: Vec<(f64, usize)>,
    /// Per-node `(a, b, |coeff|, bound, ratio)` with `C = 1`.
    pub rows: Vec<[f64; 5]>,
}

/// Fits the decay majorant to `|⟨T ψ, ψ_{(a,b)}⟩|` over the lattice.
pub fn verify_decay(kernel: &CzKernel, dict: &Dictionary) -> DecayFit {
    let field = anchor_field(kernel, dict, GroupPoint::IDENTITY);
    let unit = DecayBound::new(kernel.constants().delta, 1.0);
    let rows: Vec<[f64; 5]> = dict
        .frame()
        .nodes()
        .iter()
        .zip(field.values())
        .map(|(n, &v)| {
            let bound = lemma_bound(&unit, n.a, n.b);
            [n.a, n.b, v.abs(), bound, v.abs() / bound]
        })
        .collect();
    let mut c = 0.0;
    let mut argmax = (1.0, 0.0);
    for r in &rows {
        // Strict comparison keeps the lowest index on ties.
        if r[4] > c {
            c = r[4];
            argmax = (r[0], r[1]);
        }
    }
    let mut counts = vec![0usize; 15];
    for r in &rows {
        if r[4] > 0.0 {
            let bin = (r[4].log10().floor() + 12.0).clamp(0.0, 14.0) as usize;
            counts[bin] += 1;
        }
    }
    let histogram = counts
        .into_iter()
        .enumerate()
        .map(|(i, n)| (10f64.powi(i as i32 - 12), n))
        .collect();
    DecayFit {
        c,
        argmax,
        histogram,
        rows,
    }
}

/// `Σ |F(g)| w(g) Δλ` over the nodes selected by `keep`.
fn weighted_mass(field: &CoefficientField, keep: impl Fn(usize) -> bool) -> f64 {
    field
        .grid()
        .nodes()
        .iter()
        .zip(field.values())
        .enumerate()
        .filter(|(i, _)| keep(*i))
        .map(|(_, (n, v))| v.abs() * LocalizationWeight.eval(n.a, n.b) * n.weight)
        .sum()
}

/// Schur integral at one anchor: `w(g')^{-1} ∫ |⟨T ψ_{g'}, ψ_g⟩| w(g) dλ(g)`.
pub fn schur_value(kernel: &CzKernel, dict: &Dictionary, anchor: GroupPoint) -> f64 {
    weighted_mass(&anchor_field(kernel, dict, anchor), |_| true)
}

/// Schur integral restricted to `d(g, g') >= R`.
pub fn schur_tail(kernel: &CzKernel, dict: &Dictionary, anchor: GroupPoint, radius: f64) -> f64 {
    let field = anchor_field(kernel, dict, anchor);
    let d = dict.frame().distances_to_identity();
    weighted_mass(&field, |i| d[i] >= radius)
}

/// Restriction to `d(g, (1,0)) >= R` at one anchor.
pub fn origin_tail_at(kernel: &CzKernel, dict: &Dictionary, anchor: GroupPoint, radius: f64) -> f64 {
    let field = anchor_field(kernel, dict, anchor);
    let inv = anchor.inverse();
    let nodes = dict.frame().nodes();
    weighted_mass(&field, |i| dist(&nodes[i].point(), &inv) >= radius)
}

/// Finite anchor lattice for suprema over `(a', b')`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorLattice {
    pub scales: Vec<f64>,
    pub translations: Vec<f64>,
}

impl Default for AnchorLattice {
    fn default() -> Self {
        Self {
            scales: vec![0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0],
            translations: vec![-24.0, -5.0, -1.0, 0.0, 1.0, 5.0, 24.0],
        }
    }
}

impl AnchorLattice {
    pub fn points(&self) -> Vec<GroupPoint> {
        let mut out = Vec::new();
        for &a in &self.scales {
            for &b in &self.translations {
                if let Ok(g) = GroupPoint::new(a, b) {
                    out.push(g);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorRecord {
    pub a: f64,
    pub b: f64,
    pub schur_value: f64,
    /// Schur tail per radius, distance measured from the anchor.
    pub schur_tails: Vec<f64>,
    /// Tail per radius with the disk anchored at `(1, 0)`.
    pub origin_tails: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchurReport {
    pub operator: String,
    pub radii: Vec<f64>,
    pub anchors: Vec<AnchorRecord>,
    /// Anchors skipped because the conjugated kernel is not resolved.
    pub skipped_anchors: Vec<(f64, f64)>,
    pub schur_sup: f64,
    pub schur_tail_sup: Vec<f64>,
    pub origin_tail_sup: Vec<f64>,
}

/// Schur value and both tail families at every resolved anchor.
pub fn schur_sweep(kernel: &CzKernel, dict: &Dictionary, anchors: &[GroupPoint], radii: &[f64]) -> SchurReport {
    let h = dict.spatial().spacing();
    let frame = dict.frame();
    let d_id = frame.distances_to_identity();
    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for &g in anchors {
        if !kernel.conjugate(g).resolved(h) {
            skipped.push((g.a(), g.b()));
            continue;
        }
        let field = anchor_field(kernel, dict, g);
        let inv = g.inverse();
        let d_inv: Vec<f64> = frame.nodes().par_iter().map(|n| dist(&n.point(), &inv)).collect();
        records.push(AnchorRecord {
            a: g.a(),
            b: g.b(),
            schur_value: weighted_mass(&field, |_| true),
            schur_tails: radii.iter().map(|&r| weighted_mass(&field, |i| d_id[i] >= r)).collect(),
            origin_tails: radii.iter().map(|&r| weighted_mass(&field, |i| d_inv[i] >= r)).collect(),
        });
    }
    let sup = |f: &dyn Fn(&AnchorRecord) -> f64| records.iter().map(f).fold(0.0, f64::max);
    SchurReport {
        operator: kernel.label(),
        radii: radii.to_vec(),
        schur_sup: sup(&|r| r.schur_value),
        schur_tail_sup: (0..radii.len()).map(|k| sup(&|r| r.schur_tails[k])).collect(),
        origin_tail_sup: (0..radii.len()).map(|k| sup(&|r| r.origin_tails[k])).collect(),
        anchors: records,
        skipped_anchors: skipped,
    }
}

/// Test family with supports in `[-1, 1]`: the mother wavelet, the plateau
/// bump, and the exponential bump, each as cell averages on the lattice.
pub fn default_bundle(psi: WaveletFamily, grid: &SpatialGrid) -> Vec<LatticeSamples> {
    let plateau = WaveletFamily::PhiL2.element(GroupPoint::IDENTITY, grid);
    let exp_bump = {
        let mut e = psi.element(GroupPoint::IDENTITY, grid);
        for (k, v) in e.values.iter_mut().enumerate() {
            *v = crate::wavelet::bump(grid.x(e.start + k as i64));
        }
        e
    };
    vec![psi.element(GroupPoint::IDENTITY, grid), plateau, exp_bump]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakCompactnessProfile {
    pub operator: String,
    pub bin_width: f64,
    /// `(R, sup |⟨T f_g, h_g⟩|)` over nodes with `d(g, (1,0)) ∈ [R, R + ΔR)`.
    pub bins: Vec<(f64, f64)>,
    /// Nodes whose conjugated kernel is not resolved by the lattice.
    pub skipped_nodes: usize,
}

impl WeakCompactnessProfile {
    pub fn values(&self) -> Vec<f64> {
        self.bins.iter().map(|b| b.1).collect()
    }
}

/// `sup_{f, h ∈ B} |⟨T_g f, h⟩|` binned by distance of `g` from the identity.
pub fn weak_compactness_profile(
    kernel: &CzKernel,
    dict: &Dictionary,
    bundle: &[LatticeSamples],
    bin_width: f64,
) -> WeakCompactnessProfile {
    let grid = *dict.spatial();
    let h = grid.spacing();
    let lo = bundle.iter().map(|e| e.start).min().unwrap_or(0);
    let hi = bundle.iter().map(|e| e.end() - 1).max().unwrap_or(0);
    let per_node: Vec<Option<(f64, f64)>> = dict
        .frame()
        .nodes()
        .par_iter()
        .map(|n| {
            let g = n.point();
            let kc = kernel.conjugate(g);
            if !kc.resolved(h) {
                return None;
            }
            let mut best = 0.0f64;
            for f in bundle {
                let u = apply_lattice(&kc, &grid, f, lo, hi);
                for t in bundle {
                    best = best.max((lattice_pair(&u, t) * h).abs());
                }
            }
            Some((g.dist_to_identity(), best))
        })
        .collect();
    let skipped_nodes = per_node.iter().filter(|p| p.is_none()).count();
    let dmax = per_node.iter().flatten().map(|p| p.0).fold(0.0, f64::max);
    let nbins = (dmax / bin_width).floor() as usize + 1;
    let mut bins: Vec<(f64, f64)> = (0..nbins).map(|k| (k as f64 * bin_width, 0.0)).collect();
    let mut seen = vec![false; nbins];
    for &(d, v) in per_node.iter().flatten() {
        let k = ((d / bin_width).floor() as usize).min(nbins - 1);
        bins[k].1 = bins[k].1.max(v);
        seen[k] = true;
    }
    let bins = bins.into_iter().zip(seen).filter(|(_, s)| *s).map(|(b, _)| b).collect();
    WeakCompactnessProfile {
        operator: kernel.label(),
        bin_width,
        bins,
        skipped_nodes,
    }
}
