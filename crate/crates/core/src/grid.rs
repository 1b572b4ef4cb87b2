//! Spatial grids, sampled functions, and the hyperbolic frame lattice.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::group::GroupPoint;

/// Field of values that sampled functions and coefficient fields can carry.
pub trait Scalar:
    Copy
    + Send
    + Sync
    + PartialEq
    + std::fmt::Debug
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Mul<f64, Output = Self>
    + std::ops::AddAssign
    + 'static
{
    const ZERO: Self;
    fn from_re(x: f64) -> Self;
    fn conj(self) -> Self;
    fn norm_sqr(self) -> f64;
    fn re(self) -> f64;
    fn im(self) -> f64;
    fn abs(self) -> f64 {
        self.norm_sqr().sqrt()
    }
}

impl Scalar for f64 {
    const ZERO: Self = 0.0;
    fn from_re(x: f64) -> Self {
        x
    }
    fn conj(self) -> Self {
        self
    }
    fn norm_sqr(self) -> f64 {
        self * self
    }
    fn re(self) -> f64 {
        self
    }
    fn im(self) -> f64 {
        0.0
    }
    fn abs(self) -> f64 {
        f64::abs(self)
    }
}

impl Scalar for Complex64 {
    const ZERO: Self = Complex64::new(0.0, 0.0);
    fn from_re(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn norm_sqr(self) -> f64 {
        Complex64::norm_sqr(&self)
    }
    fn re(self) -> f64 {
        self.re
    }
    fn im(self) -> f64 {
        self.im
    }
}

/// Uniform grid on `[-L, L)` with `N` nodes `x_i = -L + i h`.
///
/// The same formula with any integer `i` defines the infinite lattice that
/// frame elements and kernel sums live on, so index arithmetic is shared
/// between the box and its extensions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialGrid {
    half_width: f64,
    points: usize,
}

impl SpatialGrid {
    pub fn new(half_width: f64, points: usize) -> Result<Self> {
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(CoreError::InvalidSpatialGrid(format!(
                "half width must be positive, got {half_width}"
            )));
        }
        if points < 16 {
            return Err(CoreError::InvalidSpatialGrid(format!(
                "need at least 16 points, got {points}"
            )));
        }
        Ok(Self { half_width, points })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points == 0
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points as f64
    }

    /// Coordinate of lattice index `i` (may lie outside the box).
    pub fn x(&self, i: i64) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.points as i64).map(|i| self.x(i)).collect()
    }

    /// Smallest lattice index with coordinate `>= x`.
    pub fn ceil_index(&self, x: f64) -> i64 {
        ((x + self.half_width) / self.spacing()).ceil() as i64
    }

    /// Largest lattice index with coordinate `<= x`.
    pub fn floor_index(&self, x: f64) -> i64 {
        ((x + self.half_width) / self.spacing()).floor() as i64
    }

    /// Same box with `factor` times as many points.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            half_width: self.half_width,
            points: self.points * factor.max(1),
        }
    }

    pub fn sample<S: Scalar>(&self, f: impl Fn(f64) -> S) -> SampledFunction<S> {
        SampledFunction {
            grid: *self,
            values: self.nodes().into_iter().map(f).collect(),
        }
    }
}

/// Function values on a spatial grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction<S: Scalar = f64> {
    grid: SpatialGrid,
    values: Vec<S>,
}

impl<S: Scalar> SampledFunction<S> {
    pub fn new(grid: SpatialGrid, values: Vec<S>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(CoreError::GridMismatch(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: SpatialGrid) -> Self {
        Self {
            grid,
            values: vec![S::ZERO; grid.len()],
        }
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [S] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<S> {
        self.values
    }

    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.spacing()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `∫ |f|` by the same Riemann sum.
    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum::<f64>() * self.grid.spacing()
    }

    pub fn sup_norm(&self) -> f64 {
        // Propagates NaN, unlike `f64::max`.
        self.values
            .iter()
            .map(|v| v.abs())
            .fold(0.0, |m, v| if v > m || v.is_nan() { v } else { m })
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| v * c).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |x, y| x + y)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |x, y| x - y)
    }

    fn zip_with(&self, other: &Self, op: impl Fn(S, S) -> S) -> Result<Self> {
        check_same_grid(&self.grid, &other.grid)?;
        Ok(Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&x, &y)| op(x, y))
                .collect(),
        })
    }

    /// Relative L² distance `‖self - reference‖ / ‖reference‖` over the
    /// nodes selected by `mask`.
    pub fn relative_error_where(&self, reference: &Self, mask: impl Fn(f64) -> bool) -> Result<f64> {
        check_same_grid(&self.grid, &reference.grid)?;
        let (mut num, mut den) = (0.0, 0.0);
        for (i, (&v, &r)) in self.values.iter().zip(&reference.values).enumerate() {
            if mask(self.grid.x(i as i64)) {
                num += (v - r).norm_sqr();
                den += r.norm_sqr();
            }
        }
        Ok((num / den).sqrt())
    }

    pub fn relative_error(&self, reference: &Self) -> Result<f64> {
        self.relative_error_where(reference, |_| true)
    }
}

pub(crate) fn check_same_grid(g1: &SpatialGrid, g2: &SpatialGrid) -> Result<()> {
    if g1 != g2 {
        return Err(CoreError::GridMismatch(format!(
            "(L={}, N={}) vs (L={}, N={})",
            g1.half_width, g1.points, g2.half_width, g2.points
        )));
    }
    Ok(())
}

/// `Σ f conj(g) h`.
pub fn inner_product<S: Scalar>(f: &SampledFunction<S>, g: &SampledFunction<S>) -> Result<S> {
    check_same_grid(&f.grid, &g.grid)?;
    let mut acc = S::ZERO;
    for (&x, &y) in f.values.iter().zip(&g.values) {
        acc += x * y.conj();
    }
    Ok(acc * f.grid.spacing())
}

/// Real samples on a contiguous run of lattice indices `start, start+1, ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSamples {
    pub start: i64,
    pub values: Vec<f64>,
}

impl LatticeSamples {
    pub fn end(&self) -> i64 {
        self.start + self.values.len() as i64
    }

    pub fn get(&self, i: i64) -> f64 {
        if i < self.start || i >= self.end() {
            0.0
        } else {
            self.values[(i - self.start) as usize]
        }
    }

    pub fn from_sampled(f: &SampledFunction<f64>) -> Self {
        Self {
            start: 0,
            values: f.values().to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameGridConfig {
    pub a_min: f64,
    pub a_max: f64,
    /// Scale nodes per octave; `Δlog a = ln 2 / voices`.
    pub voices: usize,
    /// Translation spacing as a fraction of the scale.
    pub spacing: f64,
    /// Translation half width `L_b`; a scale row keeps every node whose
    /// element support `B(b, a)` meets `(-L_b, L_b)`.
    pub b_half_width: f64,
}

impl FrameGridConfig {
    /// Reference lattice for a spatial box of half width `L`.
    pub fn reference(half_width: f64) -> Self {
        Self {
            a_min: 0.0625,
            a_max: 2048.0,
            voices: 5,
            spacing: 0.125,
            b_half_width: half_width,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameNode {
    pub a: f64,
    pub b: f64,
    pub weight: f64,
    pub scale: usize,
}

impl FrameNode {
    pub fn point(&self) -> GroupPoint {
        GroupPoint::raw(self.a, self.b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleRow {
    pub a: f64,
    /// Index of the first node of this row in the flat node list.
    pub first: usize,
    pub count: usize,
    /// Translation index of the first node: `b = k s a` for `k = k_first ..`.
    pub k_first: i64,
}

/// Finite lattice in `(a, b)` with Haar quadrature weights.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameGrid {
    config: FrameGridConfig,
    rows: Vec<ScaleRow>,
    nodes: Vec<FrameNode>,
}

pub fn make_frame_grid(config: &FrameGridConfig, spatial: &SpatialGrid) -> Result<FrameGrid> {
    FrameGrid::new(config, spatial)
}

impl FrameGrid {
    pub fn new(config: &FrameGridConfig, spatial: &SpatialGrid) -> Result<Self> {
        let limit = 2.0 * spatial.spacing();
        if !(config.a_min >= limit * (1.0 - 1e-12)) {
            return Err(CoreError::Resolution {
                a_min: config.a_min,
                limit,
            });
        }
        Self::unchecked(config)
    }

    /// Builds the lattice without the spatial resolution check.
    pub fn unchecked(config: &FrameGridConfig) -> Result<Self> {
        let c = config;
        if !(c.a_max >= c.a_min) || !c.a_max.is_finite() {
            return Err(CoreError::InvalidFrameGrid(format!(
                "need a_min <= a_max, got {} and {}",
                c.a_min, c.a_max
            )));
        }
        if !(c.spacing > 0.0 && c.spacing <= 1.0) {
            return Err(CoreError::InvalidFrameGrid(format!(
                "spacing ratio must lie in (0, 1], got {}",
                c.spacing
            )));
        }
        if c.voices == 0 {
            return Err(CoreError::InvalidFrameGrid("voices must be positive".into()));
        }
        if !(c.b_half_width > 0.0) {
            return Err(CoreError::InvalidFrameGrid(format!(
                "translation half width must be positive, got {}",
                c.b_half_width
            )));
        }
        let dlog = std::f64::consts::LN_2 / c.voices as f64;
        let octaves = (c.a_max / c.a_min).log2();
        let scale_count = (octaves * c.voices as f64 + 1e-9).floor() as usize + 1;
        let weight = dlog * c.spacing;
        let mut rows = Vec::with_capacity(scale_count);
        let mut nodes = Vec::new();
        for j in 0..scale_count {
            let a = c.a_min * (j as f64 / c.voices as f64).exp2();
            let step = c.spacing * a;
            let reach = c.b_half_width + a;
            // Strict |b| < L_b + a.
            let k_max = ((reach / step) - 1e-12).ceil() as i64 - 1;
            let first = nodes.len();
            for k in -k_max..=k_max {
                nodes.push(FrameNode {
                    a,
                    b: k as f64 * step,
                    weight,
                    scale: j,
                });
            }
            rows.push(ScaleRow {
                a,
                first,
                count: nodes.len() - first,
                k_first: -k_max,
            });
        }
        Ok(Self {
            config: *c,
            rows,
            nodes,
        })
    }

    pub fn config(&self) -> &FrameGridConfig {
        &self.config
    }

    pub fn rows(&self) -> &[ScaleRow] {
        &self.rows
    }

    pub fn nodes(&self) -> &[FrameNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn dlog_a(&self) -> f64 {
        std::f64::consts::LN_2 / self.config.voices as f64
    }

    /// Node indices of row `j` whose translation lies in the open interval
    /// `(lo, hi)`.
    pub fn row_range(&self, j: usize, lo: f64, hi: f64) -> std::ops::Range<usize> {
        let row = &self.rows[j];
        let step = self.config.spacing * row.a;
        let k_lo = ((lo / step).floor() as i64 + 1).max(row.k_first);
        let k_hi_excl = ((hi / step).ceil() as i64).min(row.k_first + row.count as i64);
        if k_hi_excl <= k_lo {
            return row.first..row.first;
        }
        let mut start = row.first + (k_lo - row.k_first) as usize;
        let mut end = row.first + (k_hi_excl - row.k_first) as usize;
        // Guard the open ends against rounding in the division.
        while start < end && self.nodes[start].b <= lo {
            start += 1;
        }
        while end > start && self.nodes[end - 1].b >= hi {
            end -= 1;
        }
        start..end
    }

    /// Index of the node closest to `(a, b)` in `(log a, b / a)`.
    pub fn nearest(&self, a: f64, b: f64) -> usize {
        let j = (((a / self.config.a_min).log2() * self.config.voices as f64).round().max(0.0) as usize)
            .min(self.rows.len() - 1);
        let row = &self.rows[j];
        let step = self.config.spacing * row.a;
        let k = ((b / step).round() as i64).clamp(row.k_first, row.k_first + row.count as i64 - 1);
        row.first + (k - row.k_first) as usize
    }

    pub fn distances_to_identity(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.point().dist_to_identity()).collect()
    }

    /// Total Haar weight of the nodes inside `D(center, R)`.
    pub fn disk_weight(&self, center: &GroupPoint, radius: f64) -> f64 {
        self.nodes
            .iter()
            .filter(|n| n.point().dist(center) < radius)
            .map(|n| n.weight)
            .sum()
    }
}

/// Nodes at hyperbolic distance `>= R` from the identity.
pub fn tail_nodes(grid: &FrameGrid, radius: f64) -> Vec<usize> {
    grid.nodes
        .iter()
        .enumerate()
        .filter(|(_, n)| n.point().dist_to_identity() >= radius)
        .map(|(i, _)| i)
        .collect()
}
