#![allow(dead_code)]

use std::sync::Arc;

use czframe_core::{Dictionary, FrameGrid, FrameGridConfig, MotherWavelet, SpatialGrid};

pub struct Setup {
    pub grid: SpatialGrid,
    pub psi: MotherWavelet,
    pub frame: Arc<FrameGrid>,
    pub dict: Arc<Dictionary>,
}

impl Setup {
    pub fn new(grid: SpatialGrid, config: FrameGridConfig) -> Self {
        let psi = MotherWavelet::new(&grid).unwrap();
        let frame = Arc::new(FrameGrid::new(&config, &grid).unwrap());
        let dict = Arc::new(Dictionary::new(psi.family(), grid, frame.clone()));
        Self { grid, psi, frame, dict }
    }

    /// Box `[-32, 32)` with `h = 1/32` and the reference lattice.
    pub fn reference() -> Self {
        Self::new(SpatialGrid::new(32.0, 2048).unwrap(), FrameGridConfig::reference(32.0))
    }

    /// Box `[-16, 16)` with `h = 1/16`; cheap enough for property tests.
    pub fn small() -> Self {
        let grid = SpatialGrid::new(16.0, 512).unwrap();
        let config = FrameGridConfig {
            a_min: 0.125,
            a_max: 256.0,
            voices: 4,
            spacing: 0.125,
            b_half_width: 16.0,
        };
        Self::new(grid, config)
    }
}

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (hi - lo) / n as f64;
    let inner: f64 = (1..n)
        .map(|i| f(lo + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 })
        .sum();
    (f(lo) + f(hi) + inner) * h / 3.0
}

pub fn rel(x: f64, y: f64) -> f64 {
    (x - y).abs() / y.abs().max(f64::MIN_POSITIVE)
}
