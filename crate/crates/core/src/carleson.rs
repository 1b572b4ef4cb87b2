//! Coefficient measures `dμ_f = |⟨f, ψ_g⟩|² dλ`, Carleson functions over
//! lattice tents, non-tangential maximal functions and the vanishing profile
//! that separates CMO from BMO.
//!
//! Tents are indexed by lattice nodes `(r, c)` and evaluated as the limit of
//! open tents `T(B(c, r'))` with `r' → r⁺`, i.e. the closed set
//! `|b - c| <= r - a`. All suprema run over the frame lattice and are lower
//! bounds of the continuous ones.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::grid::{FrameGrid, SampledFunction};
use crate::group::GroupPoint;
use crate::wavelet::{bump, CoefficientField, Dictionary};

/// Relative slack on closed tent boundaries, in units of the row spacing.
const BOUNDARY_SLACK: f64 = 1e-9;

/// Nonnegative masses on the nodes of a frame lattice.
#[derive(Debug, Clone)]
pub struct CoefficientMeasure {
    grid: Arc<FrameGrid>,
    masses: Vec<f64>,
}

impl CoefficientMeasure {
    pub fn new(grid: Arc<FrameGrid>, masses: Vec<f64>) -> Result<Self> {
        if masses.len() != grid.len() {
            return Err(CoreError::GridMismatch(format!(
                "{} masses for {} nodes",
                masses.len(),
                grid.len()
            )));
        }
        if let Some(m) = masses.iter().find(|m| !(**m >= 0.0)) {
            return Err(CoreError::InvalidArgument(format!("negative or NaN mass {m}")));
        }
        Ok(Self { grid, masses })
    }

    /// `μ_f` from wavelet coefficients: `|c_g|² Δλ_g`.
    pub fn from_coefficients(field: &CoefficientField) -> Self {
        let grid = field.grid().clone();
        let masses = field
            .values()
            .iter()
            .zip(grid.nodes())
            .map(|(c, n)| c * c * n.weight)
            .collect();
        Self { grid, masses }
    }

    pub fn zero(grid: Arc<FrameGrid>) -> Self {
        let masses = vec![0.0; grid.len()];
        Self { grid, masses }
    }

    /// Point mass at the lattice node nearest to `g`.
    pub fn single_node(grid: Arc<FrameGrid>, g: GroupPoint, mass: f64) -> Result<Self> {
        let mut m = Self::zero(grid);
        let k = m.grid.nearest(g.a(), g.b());
        m.add_mass(k, mass)?;
        Ok(m)
    }

    pub fn add_mass(&mut self, node: usize, mass: f64) -> Result<()> {
        if !(mass >= 0.0) {
            return Err(CoreError::InvalidArgument(format!("negative or NaN mass {mass}")));
        }
        self.masses[node] += mass;
        Ok(())
    }

    pub fn grid(&self) -> &Arc<FrameGrid> {
        &self.grid
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// `μ(T(B(c, r)))/(2r)` for every node `(r, c)` of the lattice.
    pub fn tent_ratios(&self) -> TentTable {
        let grid = &self.grid;
        let step = grid.config().spacing;
        let prefix: Vec<Vec<f64>> = grid
            .rows()
            .iter()
            .map(|row| {
                let mut p = Vec::with_capacity(row.count + 1);
                p.push(0.0);
                let mut acc = 0.0;
                for m in &self.masses[row.first..row.first + row.count] {
                    acc += m;
                    p.push(acc);
                }
                p
            })
            .collect();
        let ratios = grid
            .nodes()
            .par_iter()
            .map(|node| {
                let rows = &grid.rows()[..=node.scale];
                let mass: f64 = rows
                    .iter()
                    .zip(&prefix)
                    .map(|(row, p)| {
                        let w = node.a - row.a;
                        let d = step * row.a;
                        let k_lo = ((node.b - w) / d - BOUNDARY_SLACK).ceil() as i64;
                        let k_hi = ((node.b + w) / d + BOUNDARY_SLACK).floor() as i64;
                        let lo = (k_lo - row.k_first).clamp(0, row.count as i64) as usize;
                        let hi = (k_hi - row.k_first + 1).clamp(0, row.count as i64) as usize;
                        if hi > lo {
                            p[hi] - p[lo]
                        } else {
                            0.0
                        }
                    })
                    .sum();
                mass / (2.0 * node.a)
            })
            .collect();
        TentTable {
            grid: grid.clone(),
            ratios,
        }
    }
}

/// Tent ratios `μ(T(B(c, r)))/(2r)` indexed by lattice node.
#[derive(Debug, Clone)]
pub struct TentTable {
    grid: Arc<FrameGrid>,
    ratios: Vec<f64>,
}

impl TentTable {
    pub fn ratios(&self) -> &[f64] {
        &self.ratios
    }

    /// `Cμ(x)`: sup over lattice tents indexed in the cone `V_x`.
    pub fn carleson_function(&self, x: f64) -> f64 {
        cone_sup(&self.grid, x, |k| self.ratios[k])
    }

    /// Sup of the tent ratio over tents indexed at distance `>= R` from `(1,0)`.
    pub fn vanishing_profile(&self, radii: &[f64]) -> Vec<f64> {
        let dist = self.grid.distances_to_identity();
        radii
            .iter()
            .map(|&r| {
                self.ratios
                    .iter()
                    .zip(&dist)
                    .filter(|(_, d)| **d >= r)
                    .map(|(v, _)| *v)
                    .fold(0.0, f64::max)
            })
            .collect()
    }

    /// Tent ratio along the dilation axis: `(a_j, 0)` for every scale row.
    pub fn axis_profile(&self) -> Vec<(f64, f64)> {
        self.grid
            .rows()
            .iter()
            .map(|row| (row.a, self.ratios[self.grid.nearest(row.a, 0.0)]))
            .collect()
    }
}

/// Sup of `value(k)` over lattice nodes `k` with `|x - b_k| < a_k`.
fn cone_sup(grid: &FrameGrid, x: f64, value: impl Fn(usize) -> f64) -> f64 {
    (0..grid.rows().len())
        .flat_map(|j| {
            let a = grid.rows()[j].a;
            grid.row_range(j, x - a, x + a)
        })
        .map(value)
        .fold(0.0, f64::max)
}

pub fn carleson_function(mu: &CoefficientMeasure, x: f64) -> f64 {
    mu.tent_ratios().carleson_function(x)
}

pub fn vanishing_profile(mu: &CoefficientMeasure, radii: &[f64]) -> Vec<f64> {
    mu.tent_ratios().vanishing_profile(radii)
}

/// `Mf(x) = sup_{V_x} |⟨f, φ_g⟩|` over precomputed bump pairings.
pub fn nontangential_max(pairings: &CoefficientField, x: f64) -> f64 {
    cone_sup(pairings.grid(), x, |k| pairings.values()[k].abs())
}

/// Both sides of `Σ |⟨f, φ_g⟩|^p μ_g <= C ∫ Mf^p Cμ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteinCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`; zero when both vanish and infinite when only `rhs` does.
    pub ratio: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Evaluates both sides with `x` over the spatial box nodes; `pairings` are
/// `⟨f, φ_g⟩` with `φ_g` in the L² convention.
pub fn stein_inequality_check(
    pairings: &CoefficientField,
    mu: &CoefficientMeasure,
    p: f64,
    xs: &[f64],
    dx: f64,
    bound: f64,
) -> Result<SteinCheck> {
    if !(p > 0.0) {
        return Err(CoreError::InvalidArgument(format!("exponent p = {p} must be positive")));
    }
    if !Arc::ptr_eq(pairings.grid(), mu.grid()) && **pairings.grid() != **mu.grid() {
        return Err(CoreError::GridMismatch("pairings and measure live on different lattices".into()));
    }
    let lhs: f64 = pairings
        .values()
        .iter()
        .zip(mu.masses())
        .map(|(c, m)| c.abs().powf(p) * m)
        .sum();
    let table = mu.tent_ratios();
    let rhs: f64 = xs
        .par_iter()
        .map(|&x| {
            let c = table.carleson_function(x);
            if c == 0.0 {
                0.0
            } else {
                nontangential_max(pairings, x).powf(p) * c
            }
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum::<f64>()
        * dx;
    let ratio = if lhs == 0.0 {
        0.0
    } else if rhs == 0.0 {
        f64::INFINITY
    } else {
        lhs / rhs
    };
    Ok(SteinCheck {
        lhs,
        rhs,
        ratio,
        bound,
        pass: ratio <= bound,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExpectedClass {
    Cmo,
    BmoNotCmo,
    NeitherClaimed,
}

/// Named BMO test function with a closed-form evaluator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BmoExample {
    Bump,
    /// `log|x - x0|`.
    Log { x0: f64 },
    Constant(f64),
    Zero,
}

impl BmoExample {
    /// Default list; `x0 = h/3` keeps the log finite on every lattice point.
    pub fn defaults(h: f64) -> Vec<Self> {
        vec![Self::Bump, Self::Log { x0: h / 3.0 }, Self::Constant(1.0), Self::Zero]
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::Bump => "bump",
            Self::Log { .. } => "log",
            Self::Constant(_) => "constant",
            Self::Zero => "zero",
        }
    }

    pub fn expected(&self) -> ExpectedClass {
        match self {
            Self::Log { .. } => ExpectedClass::BmoNotCmo,
            _ => ExpectedClass::Cmo,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Self::Bump => bump(x),
            Self::Log { x0 } => (x - x0).abs().ln(),
            Self::Constant(c) => c,
            Self::Zero => 0.0,
        }
    }

    /// Wavelet coefficients over the full element supports, so no box edge
    /// enters the measure.
    pub fn coefficients(&self, psi: &Dictionary) -> CoefficientField {
        psi.analyze_fn(|x| self.eval(x))
    }

    pub fn measure(&self, psi: &Dictionary) -> CoefficientMeasure {
        CoefficientMeasure::from_coefficients(&self.coefficients(psi))
    }
}

/// Sup over dyadic intervals of the mean oscillation `⨍|f - f_I|`, as a
/// BMO cross-check on the sampled box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanOscillation {
    /// `(interval length, sup of the mean oscillation at that length)`.
    pub levels: Vec<(f64, f64)>,
    pub sup: f64,
}

pub fn dyadic_mean_oscillation(f: &SampledFunction) -> MeanOscillation {
    let v = f.values();
    let h = f.grid().spacing();
    let mut levels = Vec::new();
    let mut width = v.len();
    while width >= 2 {
        let osc = v
            .chunks_exact(width)
            .map(|c| {
                let mean = c.iter().sum::<f64>() / width as f64;
                c.iter().map(|x| (x - mean).abs()).sum::<f64>() / width as f64
            })
            .fold(0.0, f64::max);
        levels.push((width as f64 * h, osc));
        width /= 2;
    }
    let sup = levels.iter().map(|l| l.1).fold(0.0, f64::max);
    MeanOscillation { levels, sup }
}
