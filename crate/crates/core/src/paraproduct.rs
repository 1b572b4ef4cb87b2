//! Paraproducts `P_β f = ∫ ⟨f, φ̃_g⟩ ⟨β, ψ_g⟩ ψ_g dλ(g)`, their adjoints, and
//! the decomposition `T = S + P_{T1} + P*_{T*1}`.
//!
//! `⟨1, φ̃_g⟩ = m_φ` for every node, so `P_β 1 = m_φ β` up to the
//! reproducing-formula error. The decomposition therefore uses the symbols
//! `T1 / m_φ` and `T*1 / m_φ`, which makes `S1 = 0` and `S*1 = 0`; `m_φ` is
//! reported alongside.

use std::sync::Arc;

use crate::compactness::LinearOperator;
use crate::error::Result;
use crate::grid::SampledFunction;
use crate::operators::{compute_t1, compute_t1_star, DenseOperator, T1Profile};
use crate::wavelet::{CoefficientField, Dictionary, PlateauBump, WaveletFamily};

/// Plateau bump `φ` of the paraproduct and its mass.
pub type BumpPhi = PlateauBump;

/// Symbol `β` with its cached wavelet coefficients.
#[derive(Debug, Clone)]
pub struct ParaproductSymbol {
    pub label: String,
    pub coefficients: CoefficientField,
}

impl ParaproductSymbol {
    pub fn from_sampled(label: &str, beta: &SampledFunction, psi: &Dictionary) -> Result<Self> {
        Ok(Self {
            label: label.to_string(),
            coefficients: psi.analyze(beta)?,
        })
    }

    /// Symbol given in closed form; coefficients use the full element
    /// supports, not the box.
    pub fn from_fn(label: &str, beta: impl Fn(f64) -> f64 + Sync, psi: &Dictionary) -> Self {
        Self {
            label: label.to_string(),
            coefficients: psi.analyze_fn(beta),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut coefficients = self.coefficients.clone();
        coefficients.values_mut().iter_mut().for_each(|v| *v *= c);
        Self {
            label: self.label.clone(),
            coefficients,
        }
    }
}

/// Shared dictionaries for paraproduct work: the wavelet frame and the
/// L¹-normalized bump family on the same lattice.
#[derive(Debug, Clone)]
pub struct ParaproductFrames {
    pub psi: Arc<Dictionary>,
    pub phi: Arc<Dictionary>,
}

impl ParaproductFrames {
    pub fn new(psi: Arc<Dictionary>) -> Self {
        let phi = Arc::new(Dictionary::new(
            WaveletFamily::PhiL1,
            *psi.spatial(),
            psi.frame().clone(),
        ));
        Self { psi, phi }
    }

    pub fn m_phi(&self) -> f64 {
        PlateauBump.mass()
    }
}

#[derive(Debug, Clone)]
pub struct Paraproduct {
    pub symbol: ParaproductSymbol,
    pub frames: ParaproductFrames,
}

impl Paraproduct {
    pub fn new(symbol: ParaproductSymbol, frames: ParaproductFrames) -> Self {
        Self { symbol, frames }
    }

    /// `Σ p_g ⟨β, ψ_g⟩ ψ_g Δλ` for given bump pairings `p_g = ⟨f, φ̃_g⟩`.
    pub fn apply_pairings(&self, pairings: &CoefficientField) -> Result<SampledFunction> {
        let c = pairings.pointwise(&self.symbol.coefficients, false)?;
        self.frames.psi.synthesize(&c)
    }

    /// `Σ q_g conj(⟨β, ψ_g⟩) φ̃_g Δλ` for given wavelet coefficients `q_g = ⟨g, ψ_g⟩`.
    pub fn adjoint_pairings(&self, coefficients: &CoefficientField) -> Result<SampledFunction> {
        let c = coefficients.pointwise(&self.symbol.coefficients, true)?;
        self.frames.phi.synthesize(&c)
    }

    pub fn apply(&self, f: &SampledFunction) -> Result<SampledFunction> {
        self.apply_pairings(&self.frames.phi.analyze(f)?)
    }

    pub fn adjoint(&self, g: &SampledFunction) -> Result<SampledFunction> {
        self.adjoint_pairings(&self.frames.psi.analyze(g)?)
    }

    /// `P_β 1` with `⟨1, φ̃_g⟩` over the full bump supports.
    pub fn apply_one(&self) -> Result<SampledFunction> {
        self.apply_pairings(&self.frames.phi.analyze_fn(|_| 1.0))
    }

    /// `P*_β 1` with `⟨1, ψ_g⟩` over the full wavelet supports.
    pub fn adjoint_one(&self) -> Result<SampledFunction> {
        self.adjoint_pairings(&self.frames.psi.analyze_fn(|_| 1.0))
    }

    /// `⟨P_β f, g⟩` as the node-wise triple sum `Σ ⟨f, φ̃⟩ ⟨β, ψ⟩ ⟨ψ, g⟩ Δλ`.
    pub fn pairing(&self, f: &SampledFunction, g: &SampledFunction) -> Result<f64> {
        let pf = self.frames.phi.analyze(f)?;
        let cg = self.frames.psi.analyze(g)?;
        let nodes = self.frames.psi.frame().nodes();
        Ok(pf
            .values()
            .iter()
            .zip(self.symbol.coefficients.values())
            .zip(cg.values())
            .zip(nodes)
            .map(|(((p, b), c), n)| p * b * c * n.weight)
            .sum())
    }
}

pub fn paraproduct_apply(p: &Paraproduct, f: &SampledFunction) -> Result<SampledFunction> {
    p.apply(f)
}

pub fn paraproduct_adjoint_apply(p: &Paraproduct, g: &SampledFunction) -> Result<SampledFunction> {
    p.adjoint(g)
}

impl LinearOperator for Paraproduct {
    fn dim(&self) -> usize {
        self.frames.psi.spatial().len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let mut c = vec![0.0; self.frames.psi.frame().len()];
        self.frames.phi.analyze_slice(x, &mut c);
        for (ci, b) in c.iter_mut().zip(self.symbol.coefficients.values()) {
            *ci *= b;
        }
        self.frames.psi.synthesize_slice(&c, y);
    }

    fn apply_adjoint(&self, x: &[f64], y: &mut [f64]) {
        let mut c = vec![0.0; self.frames.psi.frame().len()];
        self.frames.psi.analyze_slice(x, &mut c);
        for (ci, b) in c.iter_mut().zip(self.symbol.coefficients.values()) {
            *ci *= b;
        }
        self.frames.phi.synthesize_slice(&c, y);
    }

    fn label(&self) -> String {
        format!("paraproduct[{}]", self.symbol.label)
    }
}

/// `T = S + P_{T1/m_φ} + P*_{T*1/m_φ}` with `S` defined by subtraction.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub operator: DenseOperator,
    pub t1: T1Profile,
    pub t1_star: T1Profile,
    pub m_phi: f64,
    /// `P_{T1/m_φ}`.
    pub p: Paraproduct,
    /// Paraproduct whose adjoint is the third term, symbol `T*1/m_φ`.
    pub p_star: Paraproduct,
}

pub fn decompose(operator: DenseOperator, frames: &ParaproductFrames, t1_tolerance: f64) -> Result<Decomposition> {
    let kernel = *operator.kernel();
    let grid = *operator.grid();
    let t1 = compute_t1(&kernel, &grid, t1_tolerance)?;
    let t1_star = compute_t1_star(&kernel, &grid, t1_tolerance)?;
    let m_phi = frames.m_phi();
    let sym = |label: &str, prof: &T1Profile| -> Result<ParaproductSymbol> {
        Ok(ParaproductSymbol::from_sampled(label, &prof.values, &frames.psi)?.scaled(1.0 / m_phi))
    };
    let p = Paraproduct::new(sym("T1/m_phi", &t1)?, frames.clone());
    let p_star = Paraproduct::new(sym("T*1/m_phi", &t1_star)?, frames.clone());
    Ok(Decomposition {
        operator,
        t1,
        t1_star,
        m_phi,
        p,
        p_star,
    })
}

impl Decomposition {
    pub fn apply_t(&self, f: &SampledFunction) -> Result<SampledFunction> {
        self.operator.apply(f)
    }

    pub fn apply_p(&self, f: &SampledFunction) -> Result<SampledFunction> {
        self.p.apply(f)
    }

    pub fn apply_p_star(&self, f: &SampledFunction) -> Result<SampledFunction> {
        self.p_star.adjoint(f)
    }

    /// `S f = T f - P f - P* f`.
    pub fn apply_s(&self, f: &SampledFunction) -> Result<SampledFunction> {
        self.apply_t(f)?.sub(&self.apply_p(f)?)?.sub(&self.apply_p_star(f)?)
    }

    /// `S 1 = T1 - P_{T1/m_φ} 1 - P*_{T*1/m_φ} 1`.
    pub fn s_one(&self) -> Result<SampledFunction> {
        self.t1
            .values
            .sub(&self.p.apply_one()?)?
            .sub(&self.p_star.adjoint_one()?)
    }

    /// `S* 1 = T*1 - P*_{T1/m_φ} 1 - P_{T*1/m_φ} 1`.
    pub fn s_star_one(&self) -> Result<SampledFunction> {
        self.t1_star
            .values
            .sub(&self.p.adjoint_one()?)?
            .sub(&self.p_star.apply_one()?)
    }
}
