//! Suite configuration: one JSON document, every field optional.

use std::path::{Path, PathBuf};

use czframe_core::operators::find_model;
use czframe_core::{FrameGridConfig, SpatialGrid};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Diagnostic {
    GroupGeometry,
    FrameIdentities,
    PvApplication,
    DecayFit,
    Localization,
    WeakCompactness,
    RkTail,
    Carleson,
    Paraproduct,
    Decomposition,
}

impl Diagnostic {
    pub const ALL: [Diagnostic; 10] = [
        Diagnostic::GroupGeometry,
        Diagnostic::FrameIdentities,
        Diagnostic::PvApplication,
        Diagnostic::DecayFit,
        Diagnostic::Localization,
        Diagnostic::WeakCompactness,
        Diagnostic::RkTail,
        Diagnostic::Carleson,
        Diagnostic::Paraproduct,
        Diagnostic::Decomposition,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Diagnostic::GroupGeometry => "group_geometry",
            Diagnostic::FrameIdentities => "frame_identities",
            Diagnostic::PvApplication => "pv_application",
            Diagnostic::DecayFit => "decay_fit",
            Diagnostic::Localization => "localization",
            Diagnostic::WeakCompactness => "weak_compactness",
            Diagnostic::RkTail => "rk_tail",
            Diagnostic::Carleson => "carleson",
            Diagnostic::Paraproduct => "paraproduct",
            Diagnostic::Decomposition => "decomposition",
        }
    }

    /// Whether the diagnostic runs once per configured operator.
    pub fn per_operator(&self) -> bool {
        matches!(
            self,
            Diagnostic::DecayFit
                | Diagnostic::Localization
                | Diagnostic::WeakCompactness
                | Diagnostic::RkTail
                | Diagnostic::Decomposition
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    /// Box `[-L, L)`.
    pub half_width: f64,
    pub points: usize,
    pub a_min: f64,
    pub a_max: f64,
    pub voices: usize,
    /// Translation step in units of the scale.
    pub spacing: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        let f = FrameGridConfig::reference(32.0);
        Self {
            half_width: 32.0,
            points: 2048,
            a_min: f.a_min,
            a_max: f.a_max,
            voices: f.voices,
            spacing: f.spacing,
        }
    }
}

impl GridConfig {
    pub fn spatial(&self) -> Result<SpatialGrid, CliError> {
        Ok(SpatialGrid::new(self.half_width, self.points)?)
    }

    pub fn frame(&self) -> FrameGridConfig {
        FrameGridConfig {
            a_min: self.a_min,
            a_max: self.a_max,
            voices: self.voices,
            spacing: self.spacing,
            b_half_width: self.half_width,
        }
    }

    pub fn spacing_h(&self) -> f64 {
        2.0 * self.half_width / self.points as f64
    }
}

/// Pass/fail thresholds. Every value must be positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub group_relative: f64,
    pub disk_area_relative: f64,
    pub parseval: f64,
    pub round_trip: f64,
    pub pv_relative_l2: f64,
    pub dual_path: f64,
    pub anchor_independence: f64,
    pub schur_tail_factor: f64,
    pub origin_tail_vanishing: f64,
    pub weak_constant: f64,
    pub weak_vanishing: f64,
    pub rk_vanishing: f64,
    pub rk_persistent: f64,
    pub carleson_vanishing: f64,
    pub carleson_persistent: f64,
    pub stein_bound: f64,
    pub paraproduct_constant: f64,
    pub paraproduct_adjoint_one: f64,
    pub paraproduct_adjointness: f64,
    pub paraproduct_rk_vanishing: f64,
    pub paraproduct_rk_persistent: f64,
    pub reconstruction: f64,
    pub paired_s1: f64,
    pub s_equals_t: f64,
    pub t1_truncation: f64,
    pub power_tolerance: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            group_relative: 1e-12,
            disk_area_relative: 0.01,
            parseval: 0.02,
            round_trip: 0.05,
            pv_relative_l2: 0.02,
            dual_path: 1e-4,
            anchor_independence: 1e-10,
            schur_tail_factor: 5.0,
            origin_tail_vanishing: 1e-3,
            weak_constant: 1e-8,
            weak_vanishing: 1e-4,
            rk_vanishing: 1e-3,
            rk_persistent: 0.1,
            carleson_vanishing: 1e-2,
            carleson_persistent: 0.2,
            stein_bound: 10.0,
            paraproduct_constant: 0.05,
            paraproduct_adjoint_one: 1e-9,
            paraproduct_adjointness: 1e-10,
            paraproduct_rk_vanishing: 1e-2,
            paraproduct_rk_persistent: 0.1,
            reconstruction: 1e-10,
            paired_s1: 0.05,
            s_equals_t: 1e-9,
            t1_truncation: 0.05,
            power_tolerance: 1e-6,
        }
    }
}

impl Tolerances {
    fn named(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("group_relative", self.group_relative),
            ("disk_area_relative", self.disk_area_relative),
            ("parseval", self.parseval),
            ("round_trip", self.round_trip),
            ("pv_relative_l2", self.pv_relative_l2),
            ("dual_path", self.dual_path),
            ("anchor_independence", self.anchor_independence),
            ("schur_tail_factor", self.schur_tail_factor),
            ("origin_tail_vanishing", self.origin_tail_vanishing),
            ("weak_constant", self.weak_constant),
            ("weak_vanishing", self.weak_vanishing),
            ("rk_vanishing", self.rk_vanishing),
            ("rk_persistent", self.rk_persistent),
            ("carleson_vanishing", self.carleson_vanishing),
            ("carleson_persistent", self.carleson_persistent),
            ("stein_bound", self.stein_bound),
            ("paraproduct_constant", self.paraproduct_constant),
            ("paraproduct_adjoint_one", self.paraproduct_adjoint_one),
            ("paraproduct_adjointness", self.paraproduct_adjointness),
            ("paraproduct_rk_vanishing", self.paraproduct_rk_vanishing),
            ("paraproduct_rk_persistent", self.paraproduct_rk_persistent),
            ("reconstruction", self.reconstruction),
            ("paired_s1", self.paired_s1),
            ("s_equals_t", self.s_equals_t),
            ("t1_truncation", self.t1_truncation),
            ("power_tolerance", self.power_tolerance),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub grid: GridConfig,
    /// Zoo labels, see `czframe --list-operators`.
    pub operators: Vec<String>,
    pub diagnostics: Vec<Diagnostic>,
    /// Hyperbolic radii for every tail profile, strictly increasing.
    pub radii: Vec<f64>,
    pub tolerances: Tolerances,
    pub seed: u64,
    pub power_max_iterations: usize,
    /// Randomized samples for the group axiom checks.
    pub group_samples: usize,
    pub output_dir: Option<PathBuf>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            grid: GridConfig::default(),
            operators: vec!["hilbert".into(), "damped_hilbert_1".into(), "finite_rank".into()],
            diagnostics: Diagnostic::ALL.to_vec(),
            radii: (0..=8).map(f64::from).collect(),
            tolerances: Tolerances::default(),
            seed: 20_240_601,
            power_max_iterations: 500,
            group_samples: 10_000,
            output_dir: None,
        }
    }
}

impl SuiteConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: SuiteConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        for (name, v) in self.tolerances.named() {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("tolerance {name} must be positive, got {v}"));
            }
        }
        for label in &self.operators {
            if find_model(label).is_none() {
                return bad(format!("unknown operator label {label:?}"));
            }
        }
        if self.radii.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return bad("radii must be finite and nonnegative".into());
        }
        if self.radii.windows(2).any(|w| w[1] <= w[0]) {
            return bad("radii must be strictly increasing".into());
        }
        if self.power_max_iterations == 0 {
            return bad("power_max_iterations must be positive".into());
        }
        let as_config = |e: czframe_core::CoreError| CliError::Config(e.to_string());
        let spatial = SpatialGrid::new(self.grid.half_width, self.grid.points).map_err(as_config)?;
        czframe_core::FrameGrid::new(&self.grid.frame(), &spatial).map_err(as_config)?;
        Ok(())
    }

    /// Radii usable for the tail functional: a witness concentrated at
    /// hyperbolic distance `R` from `(1, 0)` needs support of length about
    /// `e^R`, so radii beyond `ln 2L` are not resolved by the box.
    pub fn rk_radii(&self) -> Vec<f64> {
        let r_max = (2.0 * self.grid.half_width).ln().floor();
        self.radii.iter().copied().filter(|&r| r <= r_max).collect()
    }
}
