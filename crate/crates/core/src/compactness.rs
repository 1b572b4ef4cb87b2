//! Riesz–Kolmogorov tail functionals and a singular-spectrum proxy.
//!
//! For a discretized operator `M` (h-weighted, acting on box values) the tail
//! functional `sup_{‖f‖≤1} Σ_{d(g,(1,0))≥R} |⟨Mf, ψ_g⟩|² Δλ_g` equals the top
//! eigenvalue of `Mᵀ S_R M` in Euclidean coordinates, where
//! `S_R = synthesize ∘ restrict_R ∘ analyze`. It is computed by power
//! iteration on that symmetric positive semidefinite map.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::grid::SampledFunction;
use crate::operators::DenseOperator;
use crate::wavelet::Dictionary;

/// Linear operator on box values with its Euclidean transpose.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
    fn apply_adjoint(&self, x: &[f64], y: &mut [f64]);
    fn label(&self) -> String;
}

impl LinearOperator for DenseOperator {
    fn dim(&self) -> usize {
        DenseOperator::dim(self)
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matvec(x, y)
    }

    fn apply_adjoint(&self, x: &[f64], y: &mut [f64]) {
        self.matvec_transpose(x, y)
    }

    fn label(&self) -> String {
        self.kernel().label()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerSettings {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for PowerSettings {
    fn default() -> Self {
        Self {
            tolerance: 1e-6,
            max_iterations: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerResult {
    /// Last Rayleigh quotient.
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Unit Euclidean maximizer estimate.
    pub vector: Vec<f64>,
}

/// Power iteration for the top eigenvalue of a symmetric PSD map.
///
/// Stops when successive Rayleigh quotients agree to `tolerance` relative.
pub fn power_iteration(
    map: impl Fn(&[f64], &mut [f64]),
    start: Vec<f64>,
    settings: &PowerSettings,
) -> PowerResult {
    let n = start.len();
    let mut x = start;
    normalize(&mut x);
    let mut y = vec![0.0; n];
    let mut value = 0.0;
    for it in 1..=settings.max_iterations {
        map(&x, &mut y);
        let rq: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return PowerResult {
                value: 0.0,
                iterations: it,
                converged: true,
                vector: x,
            };
        }
        let done = it > 1 && (rq - value).abs() <= settings.tolerance * rq.abs();
        value = rq;
        if done {
            return PowerResult {
                value,
                iterations: it,
                converged: true,
                vector: x,
            };
        }
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / norm;
        }
    }
    PowerResult {
        value,
        iterations: settings.max_iterations,
        converged: false,
        vector: x,
    }
}

fn normalize(x: &mut [f64]) {
    let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n > 0.0 {
        x.iter_mut().for_each(|v| *v /= n);
    }
}

pub(crate) fn random_unit(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    normalize(&mut v);
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Vanishing,
    NonVanishing,
    Inconclusive,
}

/// Classifies `last / first` against the two thresholds.
pub fn trend_verdict(first: f64, last: f64, vanishing_below: f64, persistent_above: f64) -> Verdict {
    if first <= 0.0 {
        return Verdict::Vanishing;
    }
    let ratio = last / first;
    if ratio < vanishing_below {
        Verdict::Vanishing
    } else if ratio > persistent_above {
        Verdict::NonVanishing
    } else {
        Verdict::Inconclusive
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailFunctional {
    pub operator: String,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub iterations: Vec<usize>,
    pub converged: Vec<bool>,
    /// Unit-norm maximizer at the largest radius.
    pub witness: SampledFunction,
}

impl TailFunctional {
    /// `value(R_max) / value(0)`, zero when the operator vanishes.
    pub fn ratio(&self) -> f64 {
        match (self.values.first(), self.values.last()) {
            (Some(&f), Some(&l)) if f > 0.0 => l / f,
            _ => 0.0,
        }
    }
}

/// `Σ_{tail} |⟨y, e_g⟩|² Δλ` weights: `S_R y = synthesize(mask_R · analyze(y))`.
fn tail_projector(dict: &Dictionary, mask: &[bool], y: &[f64], coeffs: &mut [f64], out: &mut [f64]) {
    dict.analyze_slice(y, coeffs);
    for (c, &m) in coeffs.iter_mut().zip(mask) {
        if !m {
            *c = 0.0;
        }
    }
    dict.synthesize_slice(coeffs, out);
}

/// Tail functional at every radius (ascending). Each radius warm-starts from
/// the previous maximizer; the first starts from a seeded random vector.
pub fn rk_tail(
    op: &dyn LinearOperator,
    dict: &Dictionary,
    radii: &[f64],
    settings: &PowerSettings,
    seed: u64,
) -> TailFunctional {
    let n = op.dim();
    let dists = dict.frame().distances_to_identity();
    let mut values = Vec::new();
    let mut iterations = Vec::new();
    let mut converged = Vec::new();
    let mut start = random_unit(n, seed);
    let mut last_vector = start.clone();
    for &r in radii {
        let mask: Vec<bool> = dists.iter().map(|&d| d >= r).collect();
        let res = if !mask.iter().any(|&m| m) {
            PowerResult {
                value: 0.0,
                iterations: 0,
                converged: true,
                vector: start.clone(),
            }
        } else {
            let map = |x: &[f64], y: &mut [f64]| {
                let mut t = vec![0.0; n];
                let mut s = vec![0.0; n];
                let mut c = vec![0.0; dict.frame().len()];
                op.apply(x, &mut t);
                tail_projector(dict, &mask, &t, &mut c, &mut s);
                op.apply_adjoint(&s, y);
            };
            power_iteration(map, start.clone(), settings)
        };
        values.push(res.value.max(0.0));
        iterations.push(res.iterations);
        converged.push(res.converged);
        // A degenerate maximizer would stall the next radius.
        if res.value > 0.0 {
            start = res.vector.clone();
        }
        last_vector = res.vector;
    }
    // Enforce the nested-set monotonicity against iteration noise.
    for k in 1..values.len() {
        if values[k] > values[k - 1] {
            values[k] = values[k - 1];
        }
    }
    let h = dict.spatial().spacing();
    let witness = SampledFunction::new(
        *dict.spatial(),
        last_vector.iter().map(|v| v / h.sqrt()).collect(),
    )
    .expect("witness length matches the grid");
    TailFunctional {
        operator: op.label(),
        radii: radii.to_vec(),
        values,
        iterations,
        converged,
        witness,
    }
}

/// `Σ_{d(g,(1,0))≥R} |⟨T f, ψ_g⟩|² Δλ / ‖f‖²` for an explicit `f`.
pub fn tail_energy(op: &dyn LinearOperator, dict: &Dictionary, f: &SampledFunction, radius: f64) -> f64 {
    let n = op.dim();
    let mut t = vec![0.0; n];
    op.apply(f.values(), &mut t);
    let mut c = vec![0.0; dict.frame().len()];
    dict.analyze_slice(&t, &mut c);
    let energy: f64 = dict
        .frame()
        .nodes()
        .iter()
        .zip(&c)
        .filter(|(node, _)| node.point().dist_to_identity() >= radius)
        .map(|(node, v)| v * v * node.weight)
        .sum();
    energy / f.norm_sqr()
}

/// Tail functional from a dense SVD of the explicit tail map; the reference
/// for small instances.
pub fn rk_tail_dense(op: &dyn LinearOperator, dict: &Dictionary, radius: f64) -> f64 {
    let n = op.dim();
    let h = dict.spatial().spacing();
    let nodes = dict.frame().nodes();
    let tail: Vec<usize> = (0..nodes.len())
        .filter(|&k| nodes[k].point().dist_to_identity() >= radius)
        .collect();
    if tail.is_empty() {
        return 0.0;
    }
    // Row g of A is sqrt(Δλ_g) h e_gᵀ M, i.e. sqrt(Δλ_g) h (Mᵀ e_g)ᵀ.
    let mut a = DMatrix::<f64>::zeros(tail.len(), n);
    let mut e = vec![0.0; n];
    let mut row = vec![0.0; n];
    for (r, &k) in tail.iter().enumerate() {
        e.iter_mut().for_each(|v| *v = 0.0);
        let (s, vals) = dict.clipped(k);
        e[s..s + vals.len()].copy_from_slice(vals);
        op.apply_adjoint(&e, &mut row);
        let scale = nodes[k].weight.sqrt() * h;
        for (c, v) in row.iter().enumerate() {
            a[(r, c)] = scale * v;
        }
    }
    let sigma = a.singular_values().max();
    sigma * sigma / h
}

/// Top-`k` singular values of the h-weighted operator matrix, descending,
/// by block subspace iteration with Rayleigh–Ritz extraction.
pub fn singular_spectrum(op: &DenseOperator, k: usize, seed: u64) -> Vec<f64> {
    let n = op.dim();
    let k = k.min(n);
    if k == 0 {
        return Vec::new();
    }
    let m = DMatrix::from_row_slice(n, n, op.matrix());
    if n <= 512 {
        let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s.truncate(k);
        return s;
    }
    let p = (k + 8).min(n);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut q = DMatrix::from_fn(n, p, |_, _| rng.random_range(-1.0..1.0)).qr().q();
    let mt = m.transpose();
    let mut prev: Vec<f64> = vec![0.0; k];
    for _ in 0..150 {
        let z = &mt * (&m * &q);
        q = z.qr().q();
        let b = &m * &q;
        let mut s: Vec<f64> = b.singular_values().iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s.truncate(k);
        let stable = s
            .iter()
            .zip(&prev)
            .all(|(a, b)| (a - b).abs() <= 1e-7 * s[0].max(f64::MIN_POSITIVE));
        prev = s;
        if stable {
            break;
        }
    }
    prev
}
