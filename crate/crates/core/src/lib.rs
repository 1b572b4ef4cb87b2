//! Continuous wavelet frames on the ax+b group and numerical diagnostics for
//! Calderón–Zygmund operators: localization, Riesz–Kolmogorov tails,
//! Carleson profiles, and paraproduct decompositions.

pub mod carleson;
pub mod compactness;
pub mod error;
pub mod grid;
pub mod group;
pub mod localization;
pub mod operators;
pub mod paraproduct;
pub mod wavelet;

pub use error::{CoreError, Result};
pub use grid::{
    inner_product, make_frame_grid, tail_nodes, FrameGrid, FrameGridConfig, FrameNode, LatticeSamples,
    SampledFunction, Scalar, SpatialGrid,
};
pub use group::{dist, haar_ball_volume, mul, Cone, GroupPoint, HaarVolume, Tent};
pub use wavelet::{
    analyze, frame_element, make_mother_wavelet, synthesize, CoefficientField, Dictionary, MotherWavelet,
    PlateauBump, WaveletFamily,
};
pub use operators::{
    apply, compute_t1, compute_t1_star, conjugate, model_zoo, BaseKernel, CzKernel, DenseOperator, FiniteRank,
    ModelOperator, T1Profile,
};
