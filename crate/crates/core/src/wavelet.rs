//! Mother wavelet, bump profiles, and the discretized continuous frame.
//!
//! Frame elements are stored as cell averages over the lattice cells
//! `[x_i - h/2, x_i + h/2)`. For the wavelet this is exact through the
//! antiderivative (the generating bump), so every discrete element has zero
//! mean up to rounding regardless of how small its scale is.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{CoreError, Result};
use crate::grid::{FrameGrid, LatticeSamples, SampledFunction, Scalar, SpatialGrid};
use crate::group::GroupPoint;

/// `exp(-1/(1-x²))` on `(-1, 1)`, zero elsewhere.
pub fn bump(x: f64) -> f64 {
    let s = 1.0 - x * x;
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / s).exp()
    }
}

pub fn bump_derivative(x: f64) -> f64 {
    let s = 1.0 - x * x;
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / s).exp() * (-2.0 * x / (s * s))
    }
}

pub fn bump_second_derivative(x: f64) -> f64 {
    let s = 1.0 - x * x;
    if s <= 0.0 {
        return 0.0;
    }
    // d/dx [e^{-1/s} (-2x/s²)] with s' = -2x.
    let e = (-1.0 / s).exp();
    let g = -2.0 * x / (s * s);
    let dg = -2.0 / (s * s) - 8.0 * x * x / (s * s * s);
    e * (g * g + dg)
}

/// `∫₀^∞ |ĝ(ξ)|² dξ / ξ` for `ĝ(ξ) = ∫ g(x) e^{-2πixξ} dx`, from an FFT of
/// `g` sampled on `[-half_width, half_width)` with `points` nodes.
pub fn admissibility_integral(g: impl Fn(f64) -> f64, half_width: f64, points: usize) -> f64 {
    let dx = 2.0 * half_width / points as f64;
    let mut buf: Vec<Complex64> = (0..points)
        .map(|i| Complex64::new(g(-half_width + i as f64 * dx), 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(points).process(&mut buf);
    let dxi = 1.0 / (points as f64 * dx);
    let integrand = |k: usize| buf[k].norm_sqr() * dx * dx / (k as f64 * dxi);
    // Trapezoid over 0 < ξ < Nyquist; the integrand vanishes linearly at
    // ξ = 0, so the Euler-Maclaurin end correction `dξ² f'(0)/12` restores
    // fourth order in `dξ`.
    let body: f64 = (1..points / 2).map(|k| integrand(k) * dxi).sum();
    body + dxi * integrand(1) / 12.0
}

/// Derivative-of-bump mother wavelet normalized by the squared Calderón
/// condition `∫₀^∞ |ψ̂(t)|² dt/t = 1`.
#[derive(Debug, Clone)]
pub struct MotherWavelet {
    scale: f64,
    admissibility: f64,
    derivative_bound: f64,
    profile: SampledFunction,
}

impl MotherWavelet {
    /// Normalizes on an auxiliary grid 16 times finer than `grid`.
    pub fn new(grid: &SpatialGrid) -> Result<Self> {
        let aux = grid.refined(16);
        let raw = admissibility_integral(bump_derivative, aux.half_width(), aux.len());
        if !(raw > 0.0) || !raw.is_finite() {
            return Err(CoreError::InvalidArgument(format!(
                "degenerate admissibility integral {raw}"
            )));
        }
        let scale = 1.0 / raw.sqrt();
        let admissibility = admissibility_integral(
            |x| scale * bump_derivative(x),
            aux.half_width(),
            aux.len(),
        );
        let derivative_bound = scale
            * (0..=4000)
                .map(|i| bump_second_derivative(-1.0 + i as f64 / 2000.0).abs())
                .fold(0.0, f64::max);
        let mut w = Self {
            scale,
            admissibility,
            derivative_bound,
            profile: SampledFunction::zeros(*grid),
        };
        w.profile = WaveletFamily::Psi(w.scale).box_element(GroupPoint::IDENTITY, grid);
        Ok(w)
    }

    /// Normalization factor applied to the raw bump derivative.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn admissibility(&self) -> f64 {
        self.admissibility
    }

    pub fn derivative_bound(&self) -> f64 {
        self.derivative_bound
    }

    /// Cell-averaged samples of `ψ` on the working grid.
    pub fn profile(&self) -> &SampledFunction {
        &self.profile
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.scale * bump_derivative(x)
    }

    pub fn family(&self) -> WaveletFamily {
        WaveletFamily::Psi(self.scale)
    }
}

pub fn make_mother_wavelet(grid: &SpatialGrid) -> Result<MotherWavelet> {
    MotherWavelet::new(grid)
}

/// Smooth plateau bump: `1` on `|x| ≤ 1/2`, `0` on `|x| ≥ 1`, radial and
/// non-increasing, built from the standard `C^∞` smoothstep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlateauBump;

impl PlateauBump {
    pub fn eval(&self, x: f64) -> f64 {
        let r = x.abs();
        if r <= 0.5 {
            1.0
        } else if r >= 1.0 {
            0.0
        } else {
            smoothstep(2.0 * (1.0 - r))
        }
    }

    /// `∫ φ`; exactly `3/2` because `S(t) + S(1-t) = 1`.
    pub fn mass(&self) -> f64 {
        1.5
    }
}

/// `C^∞` step from 0 at `t ≤ 0` to 1 at `t ≥ 1`.
pub fn smoothstep(t: f64) -> f64 {
    let e = |t: f64| if t <= 0.0 { 0.0 } else { (-1.0 / t).exp() };
    let (p, q) = (e(t), e(1.0 - t));
    if p + q == 0.0 {
        0.0
    } else {
        p / (p + q)
    }
}

/// Atom families living on the frame lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WaveletFamily {
    /// `a^{-1/2} ψ((x-b)/a)` with `ψ = c · bump'`; the field is `c`.
    Psi(f64),
    /// `a^{-1/2} φ((x-b)/a)`, unit L² scaling.
    PhiL2,
    /// `a^{-1} φ((x-b)/a)`, unit L¹ scaling.
    PhiL1,
}

const GAUSS3: [(f64, f64); 3] = [
    (-0.774_596_669_241_483_4, 5.0 / 18.0),
    (0.0, 8.0 / 18.0),
    (0.774_596_669_241_483_4, 5.0 / 18.0),
];

impl WaveletFamily {
    /// Cell-averaged element on the lattice of `grid`, over all cells that
    /// meet `B(b, a)`.
    pub fn element(&self, g: GroupPoint, grid: &SpatialGrid) -> LatticeSamples {
        let (a, b) = (g.a(), g.b());
        let h = grid.spacing();
        let lo = grid.floor_index(b - a - 0.5 * h);
        let hi = grid.ceil_index(b + a + 0.5 * h);
        let len = (hi - lo + 1).max(0) as usize;
        let values = match *self {
            WaveletFamily::Psi(c) => {
                let amp = c * a.sqrt() / h;
                let edges: Vec<f64> = (0..=len)
                    .map(|k| bump((grid.x(lo + k as i64) - 0.5 * h - b) / a))
                    .collect();
                edges.windows(2).map(|w| amp * (w[1] - w[0])).collect()
            }
            WaveletFamily::PhiL2 | WaveletFamily::PhiL1 => {
                let amp = if matches!(self, WaveletFamily::PhiL2) {
                    a.sqrt().recip()
                } else {
                    a.recip()
                };
                let sub = ((4.0 * h / a).ceil() as usize).max(1);
                let w = h / sub as f64;
                (0..len)
                    .map(|k| {
                        let left = grid.x(lo + k as i64) - 0.5 * h;
                        let mut acc = 0.0;
                        for s in 0..sub {
                            let mid = left + (s as f64 + 0.5) * w;
                            for (t, wt) in GAUSS3 {
                                acc += wt * PlateauBump.eval((mid + 0.5 * w * t - b) / a);
                            }
                        }
                        amp * acc / sub as f64
                    })
                    .collect()
            }
        };
        LatticeSamples { start: lo, values }
    }

    /// The element restricted to the box as a sampled function.
    pub fn box_element(&self, g: GroupPoint, grid: &SpatialGrid) -> SampledFunction {
        let e = self.element(g, grid);
        let mut out = SampledFunction::zeros(*grid);
        let n = grid.len() as i64;
        for (k, &v) in e.values.iter().enumerate() {
            let i = e.start + k as i64;
            if (0..n).contains(&i) {
                out.values_mut()[i as usize] = v;
            }
        }
        out
    }
}

/// Frame element `U(a, b) ψ` restricted to the grid box.
///
/// Returns the element together with an under-resolution flag (`a < 2h`).
pub fn frame_element(psi: &MotherWavelet, g: GroupPoint, grid: &SpatialGrid) -> (SampledFunction, bool) {
    let under = g.a() < 2.0 * grid.spacing();
    (psi.family().box_element(g, grid), under)
}

/// Values attached to frame lattice nodes.
#[derive(Debug, Clone)]
pub struct CoefficientField<S: Scalar = f64> {
    grid: Arc<FrameGrid>,
    values: Vec<S>,
}

impl<S: Scalar> CoefficientField<S> {
    pub fn new(grid: Arc<FrameGrid>, values: Vec<S>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(CoreError::GridMismatch(format!(
                "{} values for {} frame nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Arc<FrameGrid>) -> Self {
        let values = vec![S::ZERO; grid.len()];
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<FrameGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [S] {
        &mut self.values
    }

    /// `Σ |F|² Δλ`.
    pub fn energy(&self) -> f64 {
        self.values
            .iter()
            .zip(self.grid.nodes())
            .map(|(v, n)| v.norm_sqr() * n.weight)
            .sum()
    }

    /// Node-wise product `self · conj(other)` when `conjugate` is set,
    /// plain product otherwise.
    pub fn pointwise(&self, other: &CoefficientField<S>, conjugate: bool) -> Result<Self> {
        if !same_frame(&self.grid, &other.grid) {
            return Err(CoreError::GridMismatch("coefficient fields on different lattices".into()));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&x, &y)| if conjugate { x * y.conj() } else { x * y })
            .collect();
        Ok(Self {
            grid: self.grid.clone(),
            values,
        })
    }

    /// CSV rows `a, b, Re, Im, Δλ`.
    pub fn rows(&self) -> impl Iterator<Item = [f64; 5]> + '_ {
        self.grid
            .nodes()
            .iter()
            .zip(&self.values)
            .map(|(n, v)| [n.a, n.b, v.re(), v.im(), n.weight])
    }
}

/// One atom family discretized on a spatial grid and a frame lattice, with
/// the box-clipped elements cached for repeated analysis and synthesis.
#[derive(Debug, Clone)]
pub struct Dictionary {
    family: WaveletFamily,
    spatial: SpatialGrid,
    frame: Arc<FrameGrid>,
    starts: Vec<usize>,
    offsets: Vec<usize>,
    data: Vec<f64>,
}

impl Dictionary {
    pub fn new(family: WaveletFamily, spatial: SpatialGrid, frame: Arc<FrameGrid>) -> Self {
        let n = spatial.len() as i64;
        let clipped: Vec<(usize, Vec<f64>)> = frame
            .nodes()
            .par_iter()
            .map(|node| {
                let e = family.element(node.point(), &spatial);
                let lo = e.start.max(0);
                let hi = e.end().min(n);
                if hi <= lo {
                    (0, Vec::new())
                } else {
                    let from = (lo - e.start) as usize;
                    let to = (hi - e.start) as usize;
                    (lo as usize, e.values[from..to].to_vec())
                }
            })
            .collect();
        let mut starts = Vec::with_capacity(clipped.len());
        let mut offsets = Vec::with_capacity(clipped.len() + 1);
        let mut data = Vec::with_capacity(clipped.iter().map(|c| c.1.len()).sum());
        offsets.push(0);
        for (s, v) in clipped {
            starts.push(s);
            data.extend_from_slice(&v);
            offsets.push(data.len());
        }
        Self {
            family,
            spatial,
            frame,
            starts,
            offsets,
            data,
        }
    }

    pub fn family(&self) -> WaveletFamily {
        self.family
    }

    pub fn spatial(&self) -> &SpatialGrid {
        &self.spatial
    }

    pub fn frame(&self) -> &Arc<FrameGrid> {
        &self.frame
    }

    /// Box-clipped element of node `k`: first box index and values.
    pub fn clipped(&self, k: usize) -> (usize, &[f64]) {
        (self.starts[k], &self.data[self.offsets[k]..self.offsets[k + 1]])
    }

    /// Node-wise `⟨f, e_node⟩` over the box.
    pub fn analyze<S: Scalar>(&self, f: &SampledFunction<S>) -> Result<CoefficientField<S>> {
        crate::grid::check_same_grid(f.grid(), &self.spatial)?;
        let h = self.spatial.spacing();
        let fv = f.values();
        let values = (0..self.frame.len())
            .into_par_iter()
            .map(|k| {
                let (s, e) = self.clipped(k);
                let mut acc = S::ZERO;
                for (x, &w) in fv[s..s + e.len()].iter().zip(e) {
                    acc += *x * w;
                }
                acc * h
            })
            .collect();
        CoefficientField::new(self.frame.clone(), values)
    }

    /// Real analysis of a plain slice over the box, used by iterative solvers.
    pub fn analyze_slice(&self, f: &[f64], out: &mut [f64]) {
        let h = self.spatial.spacing();
        out.par_iter_mut().enumerate().for_each(|(k, o)| {
            let (s, e) = self.clipped(k);
            *o = dot(&f[s..s + e.len()], e) * h;
        });
    }

    /// `Σ F(node) e_node Δλ` on the box.
    pub fn synthesize<S: Scalar>(&self, field: &CoefficientField<S>) -> Result<SampledFunction<S>> {
        if !same_frame(field.grid(), &self.frame) {
            return Err(CoreError::GridMismatch("coefficient field on a different lattice".into()));
        }
        let n = self.spatial.len();
        let rows = self.frame.rows();
        let nodes = self.frame.nodes();
        let partial: Vec<Vec<S>> = rows
            .par_iter()
            .map(|row| {
                let mut acc = vec![S::ZERO; n];
                for k in row.first..row.first + row.count {
                    let c = field.values()[k] * nodes[k].weight;
                    let (s, e) = self.clipped(k);
                    for (o, &w) in acc[s..s + e.len()].iter_mut().zip(e) {
                        *o += c * w;
                    }
                }
                acc
            })
            .collect();
        let mut out = vec![S::ZERO; n];
        for p in partial {
            for (o, v) in out.iter_mut().zip(p) {
                *o += v;
            }
        }
        SampledFunction::new(self.spatial, out)
    }

    /// Real synthesis of a plain coefficient slice, used by iterative solvers.
    pub fn synthesize_slice(&self, coeffs: &[f64], out: &mut [f64]) {
        let n = self.spatial.len();
        let nodes = self.frame.nodes();
        let partial: Vec<Vec<f64>> = self
            .frame
            .rows()
            .par_iter()
            .map(|row| {
                let mut acc = vec![0.0; n];
                for k in row.first..row.first + row.count {
                    let c = coeffs[k] * nodes[k].weight;
                    if c == 0.0 {
                        continue;
                    }
                    let (s, e) = self.clipped(k);
                    for (o, &w) in acc[s..s + e.len()].iter_mut().zip(e) {
                        *o += c * w;
                    }
                }
                acc
            })
            .collect();
        out.iter_mut().for_each(|o| *o = 0.0);
        for p in partial {
            for (o, v) in out.iter_mut().zip(p) {
                *o += v;
            }
        }
    }

    /// Lattice index span covering every element support.
    pub fn lattice_span(&self) -> (i64, i64) {
        let c = self.frame.config();
        let h = self.spatial.spacing();
        let last = self.frame.rows().last().map_or(c.a_max, |r| r.a);
        let reach = c.b_half_width + 2.0 * last + 2.0 * h;
        (self.spatial.floor_index(-reach), self.spatial.ceil_index(reach))
    }

    /// Node-wise `⟨u, e_node⟩` for samples on the infinite lattice, using the
    /// full (unclipped) element supports.
    pub fn analyze_lattice(&self, u: &LatticeSamples) -> CoefficientField {
        let h = self.spatial.spacing();
        let values = self
            .frame
            .nodes()
            .par_iter()
            .map(|node| lattice_pair(&self.family.element(node.point(), &self.spatial), u) * h)
            .collect();
        CoefficientField {
            grid: self.frame.clone(),
            values,
        }
    }

    /// Analysis of a closed-form function over the full element supports.
    pub fn analyze_fn(&self, f: impl Fn(f64) -> f64 + Sync) -> CoefficientField {
        self.analyze_lattice(&self.sample_lattice(f))
    }

    /// Samples `f` on the lattice span of this dictionary.
    pub fn sample_lattice(&self, f: impl Fn(f64) -> f64 + Sync) -> LatticeSamples {
        let (lo, hi) = self.lattice_span();
        let values = (lo..=hi).into_par_iter().map(|i| f(self.spatial.x(i))).collect();
        LatticeSamples { start: lo, values }
    }

    /// `⟨u, e_g⟩` at an arbitrary group point.
    pub fn coefficient_at(&self, u: &LatticeSamples, g: GroupPoint) -> f64 {
        lattice_pair(&self.family.element(g, &self.spatial), u) * self.spatial.spacing()
    }
}

pub(crate) fn same_frame(x: &Arc<FrameGrid>, y: &Arc<FrameGrid>) -> bool {
    Arc::ptr_eq(x, y) || **x == **y
}

pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// `Σ_i e_i u_i` over the overlap of two lattice runs.
pub(crate) fn lattice_pair(e: &LatticeSamples, u: &LatticeSamples) -> f64 {
    let lo = e.start.max(u.start);
    let hi = e.end().min(u.end());
    if hi <= lo {
        return 0.0;
    }
    let ei = &e.values[(lo - e.start) as usize..(hi - e.start) as usize];
    let ui = &u.values[(lo - u.start) as usize..(hi - u.start) as usize];
    dot(ei, ui)
}

/// Node-wise analysis of a box function.
pub fn analyze<S: Scalar>(f: &SampledFunction<S>, dict: &Dictionary) -> Result<CoefficientField<S>> {
    dict.analyze(f)
}

/// Node-wise synthesis onto the box.
pub fn synthesize<S: Scalar>(field: &CoefficientField<S>, dict: &Dictionary) -> Result<SampledFunction<S>> {
    dict.synthesize(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{inner_product, FrameGridConfig};

    fn grid() -> SpatialGrid {
        SpatialGrid::new(32.0, 2048).unwrap()
    }

    #[test]
    fn bump_derivatives_match_differences() {
        for &x in &[-0.7, -0.2, 0.1, 0.55, 0.9] {
            let d = 1e-6;
            let fd = (bump(x + d) - bump(x - d)) / (2.0 * d);
            assert!((fd - bump_derivative(x)).abs() < 1e-7);
            let fd2 = (bump_derivative(x + d) - bump_derivative(x - d)) / (2.0 * d);
            assert!((fd2 - bump_second_derivative(x)).abs() < 1e-5 * (1.0 + fd2.abs()));
        }
    }

    #[test]
    fn mother_wavelet_normalization() {
        let psi = MotherWavelet::new(&grid()).unwrap();
        assert!((psi.admissibility() - 1.0).abs() < 1e-9);
        let p = psi.profile();
        let mean: f64 = p.values().iter().sum::<f64>() * grid().spacing();
        assert!(mean.abs() <= 1e-10 * p.l1_norm());
        // Support in [-1, 1].
        for (i, &v) in p.values().iter().enumerate() {
            if grid().x(i as i64).abs() > 1.0 + grid().spacing() {
                assert_eq!(v, 0.0);
            }
        }
        assert!(psi.derivative_bound().is_finite() && psi.derivative_bound() > 0.0);
    }

    #[test]
    fn plateau_bump_shape() {
        let phi = PlateauBump;
        assert_eq!(phi.eval(0.5), 1.0);
        assert_eq!(phi.eval(-0.3), 1.0);
        assert_eq!(phi.eval(1.0), 0.0);
        let mut prev = 1.0;
        for i in 0..=200 {
            let v = phi.eval(0.5 + i as f64 / 400.0);
            assert!(v <= prev);
            prev = v;
        }
        let g = grid();
        let mass = g.sample(|x| phi.eval(x)).values().iter().sum::<f64>() * g.spacing();
        assert!((mass - phi.mass()).abs() < 1e-6);
    }

    #[test]
    fn element_support_and_norm() {
        let g = grid();
        let psi = MotherWavelet::new(&g).unwrap();
        let (e, under) = frame_element(&psi, GroupPoint::new(2.0, 5.0).unwrap(), &g);
        assert!(!under);
        for (i, &v) in e.values().iter().enumerate() {
            let x = g.x(i as i64);
            if !(3.0 - g.spacing()..=7.0 + g.spacing()).contains(&x) {
                assert_eq!(v, 0.0, "x = {x}");
            }
        }
        let rel = (e.norm() - psi.profile().norm()).abs() / psi.profile().norm();
        assert!(rel < 0.01);
        let (_, under) = frame_element(&psi, GroupPoint::new(0.05, 0.0).unwrap(), &g);
        assert!(under);
    }

    #[test]
    fn disjoint_support_coefficient_vanishes() {
        let g = grid();
        let psi = MotherWavelet::new(&g).unwrap();
        let frame = Arc::new(FrameGrid::new(&FrameGridConfig::reference(32.0), &g).unwrap());
        let dict = Dictionary::new(psi.family(), g, frame.clone());
        let f = g.sample(|x| if (10.0..11.0).contains(&x) { 1.0 } else { 0.0 });
        let c = dict.analyze(&f).unwrap();
        assert_eq!(c.values()[frame.nearest(1.0, 0.0)], 0.0);
        let e = psi.family().box_element(GroupPoint::IDENTITY, &g);
        assert!((inner_product(&e, psi.profile()).unwrap() - psi.profile().norm_sqr()).abs() < 1e-15);
    }
}
