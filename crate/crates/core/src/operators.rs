//! Calderón–Zygmund kernels, principal-value discretization, T1, and the
//! model operator zoo.
//!
//! Kernels are applied on the uniform lattice with a corrected
//! principal-value stencil: the diagonal is skipped and the two nearest
//! neighbours carry weight 3/2. Plain exclusion of the diagonal reproduces
//! the Hilbert symbol only to first order in `h ξ`; the neighbour correction
//! makes the discrete symbol `i(1 - θ/π + sin θ/π)`, which is third order
//! accurate and still bounded by one.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::grid::{LatticeSamples, SampledFunction, SpatialGrid};
use crate::group::GroupPoint;
use crate::wavelet::{bump, bump_derivative};

const INV_PI: f64 = std::f64::consts::FRAC_1_PI;

/// Rank-one kernel `u(x) v(y)` with `u = bump'((x - c_u)/r_u)` and
/// `v = bump((y - c_v)/r_v)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiniteRank {
    pub u_center: f64,
    pub u_radius: f64,
    pub v_center: f64,
    pub v_radius: f64,
}

impl Default for FiniteRank {
    fn default() -> Self {
        Self {
            u_center: 0.0,
            u_radius: 1.0,
            v_center: 0.5,
            v_radius: 0.8,
        }
    }
}

impl FiniteRank {
    pub fn u(&self, x: f64) -> f64 {
        bump_derivative((x - self.u_center) / self.u_radius)
    }

    pub fn v(&self, y: f64) -> f64 {
        bump((y - self.v_center) / self.v_radius)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BaseKernel {
    Hilbert,
    DampedHilbert { alpha: f64 },
    FiniteRank(FiniteRank),
    Zero,
}

/// How the diagonal cell is treated by the discretization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Diagonal {
    /// `1/(x-y)` singularity resolved as a principal value.
    Singular,
    /// Continuous kernel, evaluated on the diagonal.
    Bounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CzConstants {
    pub c_k: f64,
    pub delta: f64,
}

/// A base kernel together with a group conjugation and an optional
/// transposition: `K_g(x, y) = a K(a x + b, a y + b)`, swapped when
/// transposed. The set is closed under both operations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CzKernel {
    base: BaseKernel,
    conj: GroupPoint,
    transposed: bool,
}

impl CzKernel {
    pub fn new(base: BaseKernel) -> Self {
        Self {
            base,
            conj: GroupPoint::IDENTITY,
            transposed: false,
        }
    }

    pub fn hilbert() -> Self {
        Self::new(BaseKernel::Hilbert)
    }

    pub fn damped_hilbert(alpha: f64) -> Self {
        Self::new(BaseKernel::DampedHilbert { alpha })
    }

    pub fn finite_rank(rank: FiniteRank) -> Self {
        Self::new(BaseKernel::FiniteRank(rank))
    }

    pub fn zero() -> Self {
        Self::new(BaseKernel::Zero)
    }

    pub fn base(&self) -> &BaseKernel {
        &self.base
    }

    pub fn conjugation(&self) -> GroupPoint {
        self.conj
    }

    pub fn is_transposed(&self) -> bool {
        self.transposed
    }

    #[inline]
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let (x, y) = if self.transposed { (y, x) } else { (x, y) };
        let (a, b) = (self.conj.a(), self.conj.b());
        a * eval_base(&self.base, a * x + b, a * y + b)
    }

    pub fn diagonal(&self) -> Diagonal {
        match self.base {
            BaseKernel::Hilbert | BaseKernel::DampedHilbert { .. } => Diagonal::Singular,
            BaseKernel::FiniteRank(_) | BaseKernel::Zero => Diagonal::Bounded,
        }
    }

    /// Declared size/smoothness constants; unchanged by conjugation.
    pub fn constants(&self) -> CzConstants {
        match self.base {
            BaseKernel::Hilbert => CzConstants {
                c_k: 2.0 * INV_PI,
                delta: 1.0,
            },
            BaseKernel::DampedHilbert { .. } => CzConstants {
                c_k: 0.8,
                delta: 1.0,
            },
            BaseKernel::FiniteRank(_) => CzConstants { c_k: 10.0, delta: 1.0 },
            BaseKernel::Zero => CzConstants { c_k: 0.0, delta: 1.0 },
        }
    }

    pub fn antisymmetric(&self) -> bool {
        matches!(
            self.base,
            BaseKernel::Hilbert | BaseKernel::DampedHilbert { .. } | BaseKernel::Zero
        )
    }

    /// `T1 = T*1 = 0` known in closed form.
    pub fn exact_cancellation(&self) -> bool {
        matches!(self.base, BaseKernel::Hilbert | BaseKernel::Zero)
    }

    /// Interval holding the `y`-support of `K(x, ·)` for every `x`, when the
    /// kernel is compactly supported in `y`.
    pub fn y_support(&self) -> Option<(f64, f64)> {
        let (c, r) = match self.base {
            BaseKernel::FiniteRank(f) if self.transposed => (f.u_center, f.u_radius),
            BaseKernel::FiniteRank(f) => (f.v_center, f.v_radius),
            BaseKernel::Zero => return Some((0.0, 0.0)),
            _ => return None,
        };
        let (a, b) = (self.conj.a(), self.conj.b());
        Some(((c - r - b) / a, (c + r - b) / a))
    }

    /// Shortest length over which the kernel departs from a scale-free
    /// profile, in the conjugated coordinates; `None` for scale-free kernels.
    pub fn feature_length(&self) -> Option<f64> {
        let base = match self.base {
            BaseKernel::Hilbert | BaseKernel::Zero => return None,
            BaseKernel::DampedHilbert { .. } => 1.0,
            BaseKernel::FiniteRank(f) => 0.4 * f.u_radius.min(f.v_radius),
        };
        Some(base / self.conj.a())
    }

    /// Whether the lattice of spacing `h` resolves the kernel (eight cells
    /// per feature length).
    pub fn resolved(&self, h: f64) -> bool {
        self.feature_length().is_none_or(|l| l >= 8.0 * h)
    }

    pub fn label(&self) -> String {
        let base = match self.base {
            BaseKernel::Hilbert => "hilbert".to_string(),
            BaseKernel::DampedHilbert { alpha } => format!("damped_hilbert_{alpha}"),
            BaseKernel::FiniteRank(_) => "finite_rank".to_string(),
            BaseKernel::Zero => "zero".to_string(),
        };
        let mut s = base;
        if self.conj != GroupPoint::IDENTITY {
            s = format!("{s}@({},{})", self.conj.a(), self.conj.b());
        }
        if self.transposed {
            s.push_str("^T");
        }
        s
    }

    /// `K_g`; conjugating twice composes as `(K_g)_{g'} = K_{g g'}`.
    pub fn conjugate(&self, g: GroupPoint) -> Self {
        Self {
            conj: self.conj * g,
            ..*self
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            transposed: !self.transposed,
            ..*self
        }
    }

    /// Quadrature weight for lattice offset `i - j`.
    #[inline]
    pub fn stencil(&self, offset: i64) -> f64 {
        match self.diagonal() {
            Diagonal::Singular => match offset {
                0 => 0.0,
                1 | -1 => 1.5,
                _ => 1.0,
            },
            Diagonal::Bounded => 1.0,
        }
    }
}

pub fn conjugate(kernel: &CzKernel, g: GroupPoint) -> CzKernel {
    kernel.conjugate(g)
}

#[inline]
fn eval_base(base: &BaseKernel, x: f64, y: f64) -> f64 {
    match *base {
        BaseKernel::Hilbert => INV_PI / (x - y),
        BaseKernel::DampedHilbert { alpha } => {
            let damp = 1.0 + x * x + y * y;
            let m = if alpha == 1.0 {
                damp.sqrt().recip()
            } else if alpha == 0.5 {
                damp.sqrt().sqrt().recip()
            } else {
                damp.powf(-0.5 * alpha)
            };
            INV_PI * m / (x - y)
        }
        BaseKernel::FiniteRank(f) => f.u(x) * f.v(y),
        BaseKernel::Zero => 0.0,
    }
}

/// Closed-form metadata for zoo members.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CompactnessStatus {
    Compact,
    NotCompact,
    /// Not certified; diagnostics report a numerical hypothesis.
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelOperator {
    pub label: String,
    pub kernel: CzKernel,
    /// `T1 ≡ 0` in closed form.
    pub t1_vanishes: bool,
    pub compactness: CompactnessStatus,
}

pub fn model_zoo() -> Vec<ModelOperator> {
    let entry = |label: &str, kernel: CzKernel, t1_vanishes: bool, compactness| ModelOperator {
        label: label.to_string(),
        kernel,
        t1_vanishes,
        compactness,
    };
    vec![
        entry("hilbert", CzKernel::hilbert(), true, CompactnessStatus::NotCompact),
        entry(
            "damped_hilbert_0.5",
            CzKernel::damped_hilbert(0.5),
            false,
            CompactnessStatus::Unknown,
        ),
        entry(
            "damped_hilbert_1",
            CzKernel::damped_hilbert(1.0),
            false,
            CompactnessStatus::Unknown,
        ),
        entry(
            "finite_rank",
            CzKernel::finite_rank(FiniteRank::default()),
            false,
            CompactnessStatus::Compact,
        ),
        entry("zero", CzKernel::zero(), true, CompactnessStatus::Compact),
    ]
}

pub fn find_model(label: &str) -> Option<ModelOperator> {
    model_zoo().into_iter().find(|m| m.label == label)
}

/// h-weighted kernel matrix on the box: `(M f)_i = Σ_j h w_{i-j} K(x_i, x_j) f_j`.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    kernel: CzKernel,
    grid: SpatialGrid,
    matrix: Vec<f64>,
}

impl DenseOperator {
    pub fn assemble(kernel: &CzKernel, grid: &SpatialGrid) -> Self {
        let n = grid.len();
        let h = grid.spacing();
        let xs = grid.nodes();
        let mut matrix = vec![0.0; n * n];
        matrix.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            for (j, m) in row.iter_mut().enumerate() {
                let w = kernel.stencil(i as i64 - j as i64);
                if w != 0.0 {
                    *m = h * w * kernel.eval(xs[i], xs[j]);
                }
            }
        });
        Self {
            kernel: *kernel,
            grid: *grid,
            matrix,
        }
    }

    pub fn kernel(&self) -> &CzKernel {
        &self.kernel
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.len()
    }

    /// Row-major matrix entries.
    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        let n = self.dim();
        y.par_iter_mut()
            .zip(self.matrix.par_chunks(n))
            .for_each(|(yi, row)| *yi = crate::wavelet::dot(row, x));
    }

    pub fn matvec_transpose(&self, x: &[f64], y: &mut [f64]) {
        let n = self.dim();
        // Column sums in fixed row order, split across output blocks.
        y.par_chunks_mut(64).enumerate().for_each(|(blk, ys)| {
            let off = blk * 64;
            ys.iter_mut().for_each(|v| *v = 0.0);
            for (i, &xi) in x.iter().enumerate() {
                if xi == 0.0 {
                    continue;
                }
                let row = &self.matrix[i * n + off..i * n + off + ys.len()];
                for (v, &m) in ys.iter_mut().zip(row) {
                    *v += xi * m;
                }
            }
        });
    }

    pub fn apply(&self, f: &SampledFunction) -> Result<SampledFunction> {
        crate::grid::check_same_grid(f.grid(), &self.grid)?;
        let mut out = vec![0.0; self.dim()];
        self.matvec(f.values(), &mut out);
        SampledFunction::new(self.grid, out)
    }

    pub fn apply_adjoint(&self, f: &SampledFunction) -> Result<SampledFunction> {
        crate::grid::check_same_grid(f.grid(), &self.grid)?;
        let mut out = vec![0.0; self.dim()];
        self.matvec_transpose(f.values(), &mut out);
        SampledFunction::new(self.grid, out)
    }
}

/// Principal-value application on the box.
pub fn apply(kernel: &CzKernel, f: &SampledFunction) -> Result<SampledFunction> {
    let grid = *f.grid();
    let h = grid.spacing();
    let xs = grid.nodes();
    let fv = f.values();
    let out = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let mut acc = 0.0;
            for (j, &fj) in fv.iter().enumerate() {
                let w = kernel.stencil(i as i64 - j as i64);
                if w != 0.0 && fj != 0.0 {
                    acc += w * kernel.eval(xs[i], xs[j]) * fj;
                }
            }
            acc * h
        })
        .collect();
    SampledFunction::new(grid, out)
}

/// Principal-value application of a lattice source onto the lattice index
/// range `[lo, hi]`.
pub fn apply_lattice(kernel: &CzKernel, grid: &SpatialGrid, src: &LatticeSamples, lo: i64, hi: i64) -> LatticeSamples {
    let h = grid.spacing();
    let xs: Vec<f64> = (src.start..src.end()).map(|j| grid.x(j)).collect();
    let values = (lo..=hi)
        .into_par_iter()
        .map(|i| {
            let x = grid.x(i);
            let mut acc = 0.0;
            for (k, (&s, &y)) in src.values.iter().zip(&xs).enumerate() {
                let w = kernel.stencil(i - (src.start + k as i64));
                if w != 0.0 && s != 0.0 {
                    acc += w * kernel.eval(x, y) * s;
                }
            }
            acc * h
        })
        .collect();
    LatticeSamples { start: lo, values }
}

/// `Σ_i Σ_j h² e_i K(x_i, y_j) s_j` over two lattice runs with disjoint
/// supports (no stencil correction needed).
pub fn double_sum(kernel: &CzKernel, grid: &SpatialGrid, src: &LatticeSamples, target: &LatticeSamples) -> f64 {
    let h = grid.spacing();
    let ys: Vec<f64> = (src.start..src.end()).map(|j| grid.x(j)).collect();
    let total: f64 = target
        .values
        .par_iter()
        .enumerate()
        .map(|(k, &t)| {
            if t == 0.0 {
                return 0.0;
            }
            let x = grid.x(target.start + k as i64);
            let row: f64 = src
                .values
                .iter()
                .zip(&ys)
                .map(|(&s, &y)| if s == 0.0 { 0.0 } else { kernel.eval(x, y) * s })
                .sum();
            row * t
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    total * h * h
}

/// Sampled `T1` with its truncation budget.
#[derive(Debug, Clone)]
pub struct T1Profile {
    pub values: SampledFunction,
    /// Half width `ρ` of the symmetric integration window around each node.
    pub window: f64,
    /// `C_K ∫_{|y-x|>ρ} |y-x|^{-1-δ} dy = 2 C_K / (δ ρ^δ)`, or zero when the
    /// kernel's `y`-support lies inside every window.
    pub tail_bound: f64,
}

/// `T1(x) = PV ∫_{|y-x|<ρ} K(x, y) dy` at every box node, with `ρ = 2L`
/// so the window covers the whole box from every node.
pub fn compute_t1(kernel: &CzKernel, grid: &SpatialGrid, tolerance: f64) -> Result<T1Profile> {
    let h = grid.spacing();
    let reach = 2 * grid.len() as i64;
    let window = reach as f64 * h;
    let CzConstants { c_k, delta } = kernel.constants();
    let (x_first, x_last) = (grid.x(0), grid.x(grid.len() as i64 - 1));
    let tail_bound = match kernel.y_support() {
        // Every window already contains the whole support.
        Some((lo, hi)) if lo >= x_last - window && hi <= x_first + window => 0.0,
        _ => 2.0 * c_k / (delta * window.powf(delta)),
    };
    if tail_bound > tolerance {
        return Err(CoreError::Truncation {
            estimate: tail_bound,
            tolerance,
        });
    }
    let values = (0..grid.len() as i64)
        .into_par_iter()
        .map(|i| {
            let x = grid.x(i);
            let mut acc = 0.0;
            for k in 1..=reach {
                let w = kernel.stencil(k);
                let d = k as f64 * h;
                acc += w * (kernel.eval(x, x + d) + kernel.eval(x, x - d));
            }
            if kernel.diagonal() == Diagonal::Bounded {
                acc += kernel.eval(x, x);
            }
            acc * h
        })
        .collect();
    Ok(T1Profile {
        values: SampledFunction::new(*grid, values)?,
        window,
        tail_bound,
    })
}

pub fn compute_t1_star(kernel: &CzKernel, grid: &SpatialGrid, tolerance: f64) -> Result<T1Profile> {
    compute_t1(&kernel.transpose(), grid, tolerance)
}

/// Outcome of a randomized size/smoothness scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CzScan {
    pub samples: usize,
    /// Largest observed `|K(x,y)| |x-y|`.
    pub size_ratio: f64,
    /// Largest observed `|K(x,y)-K(x,y')| |x-y|^{1+δ} / |y-y'|^δ`.
    pub smoothness_ratio: f64,
    pub passed: bool,
}

/// Checks the declared constants on `samples` random points in
/// `[-span, span]`. Smoothness is checked in both variables.
pub fn cz_scan(kernel: &CzKernel, samples: usize, span: f64, seed: u64) -> CzScan {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let CzConstants { c_k, delta } = kernel.constants();
    let (mut size, mut smooth) = (0.0f64, 0.0f64);
    let kt = kernel.transpose();
    for i in 0..samples {
        // Mix uniform and log-uniform separations to probe both regimes.
        let x = rng.random_range(-span..span);
        let sep = if i % 2 == 0 {
            rng.random_range(-span..span)
        } else {
            let s: f64 = rng.random_range(-6.0..2.0);
            10f64.powf(s) * if rng.random_bool(0.5) { 1.0 } else { -1.0 }
        };
        let y = x + sep;
        let r = (x - y).abs();
        if r == 0.0 {
            continue;
        }
        size = size.max(kernel.eval(x, y).abs() * r);
        let frac: f64 = rng.random_range(0.0..0.5);
        let yp = y + frac * r * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let dy = (y - yp).abs();
        if dy > 0.0 {
            let scale = r.powf(1.0 + delta) / dy.powf(delta);
            smooth = smooth.max((kernel.eval(x, y) - kernel.eval(x, yp)).abs() * scale);
            smooth = smooth.max((kt.eval(x, y) - kt.eval(x, yp)).abs() * scale);
        }
    }
    CzScan {
        samples,
        size_ratio: size,
        smoothness_ratio: smooth,
        passed: size <= c_k * (1.0 + 1e-9) && smooth <= c_k * (1.0 + 1e-9),
    }
}
