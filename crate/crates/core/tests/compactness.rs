mod common;

use common::Setup;
use czframe_core::compactness::{
    power_iteration, rk_tail, rk_tail_dense, singular_spectrum, tail_energy, trend_verdict, LinearOperator,
    PowerSettings, Verdict,
};
use czframe_core::{CzKernel, DenseOperator, FiniteRank, FrameGridConfig, GroupPoint, SpatialGrid};

/// `N = 256` instance small enough for a dense SVD of the tail map.
fn tiny() -> Setup {
    let grid = SpatialGrid::new(8.0, 256).unwrap();
    let config = FrameGridConfig {
        a_min: 0.125,
        a_max: 64.0,
        voices: 4,
        spacing: 0.25,
        b_half_width: 8.0,
    };
    Setup::new(grid, config)
}

#[test]
fn power_iteration_finds_top_eigenvalue() {
    let diag = [5.0, 3.0, 1.0, 0.5];
    let map = |x: &[f64], y: &mut [f64]| {
        for i in 0..4 {
            y[i] = diag[i] * x[i];
        }
    };
    let r = power_iteration(map, vec![1.0; 4], &PowerSettings::default());
    assert!(r.converged);
    assert!((r.value - 5.0).abs() < 1e-5);
    let capped = power_iteration(map, vec![1.0; 4], &PowerSettings { tolerance: 0.0, max_iterations: 7 });
    assert!(!capped.converged);
    assert_eq!(capped.iterations, 7);
}

#[test]
fn power_iteration_matches_dense_svd() {
    let s = tiny();
    for kernel in [CzKernel::hilbert(), CzKernel::finite_rank(FiniteRank::default()), CzKernel::damped_hilbert(1.0)] {
        let op = DenseOperator::assemble(&kernel, &s.grid);
        let radii = [0.0, 1.0, 2.0];
        let settings = PowerSettings { tolerance: 1e-10, max_iterations: 5000 };
        let tf = rk_tail(&op, &s.dict, &radii, &settings, 1);
        for (r, v) in radii.iter().zip(&tf.values) {
            let dense = rk_tail_dense(&op, &s.dict, *r);
            assert!((v - dense).abs() <= 1e-3 * dense, "{} R={r}: {v} vs {dense}", op.label());
        }
    }
}

#[test]
fn zero_operator_has_no_tail() {
    let s = tiny();
    let op = DenseOperator::assemble(&CzKernel::zero(), &s.grid);
    let tf = rk_tail(&op, &s.dict, &[0.0, 1.0, 2.0], &PowerSettings::default(), 3);
    assert!(tf.values.iter().all(|v| *v == 0.0));
    assert_eq!(tf.ratio(), 0.0);
    assert!(singular_spectrum(&op, 4, 0).iter().all(|v| *v == 0.0));
}

#[test]
fn tails_are_monotone_and_witnessed() {
    let s = Setup::small();
    let op = DenseOperator::assemble(&CzKernel::hilbert(), &s.grid);
    let radii = [0.0, 1.0, 2.0, 3.0];
    let tf = rk_tail(&op, &s.dict, &radii, &PowerSettings::default(), 5);
    assert!(tf.values.windows(2).all(|w| w[1] <= w[0]));
    assert!((tf.witness.norm() - 1.0).abs() < 1e-12);
    // The stored witness attains the last value.
    let e = tail_energy(&op, &s.dict, &tf.witness, 3.0);
    assert!((e - tf.values[3]).abs() <= 1e-3 * tf.values[3]);
    // Explicit far-translated wavelets are lower bounds for every radius.
    for b in [6.0, 9.0, 12.0] {
        let f = s.psi.family().box_element(GroupPoint::new(0.25, b).unwrap(), &s.grid);
        let e = tail_energy(&op, &s.dict, &f, 3.0);
        assert!(e <= tf.values[3] * (1.0 + 1e-6));
    }
    let f = s.psi.family().box_element(GroupPoint::new(0.25, 12.0).unwrap(), &s.grid);
    assert!(tail_energy(&op, &s.dict, &f, 3.0) > 0.1 * tf.values[0]);
}

#[test]
fn singular_spectra_of_model_operators() {
    let grid = SpatialGrid::new(16.0, 512).unwrap();
    let fr = singular_spectrum(&DenseOperator::assemble(&CzKernel::finite_rank(FiniteRank::default()), &grid), 8, 0);
    assert_eq!(fr.iter().filter(|v| **v > 1e-10 * fr[0]).count(), 1);
    let h = singular_spectrum(&DenseOperator::assemble(&CzKernel::hilbert(), &grid), 64, 0);
    assert!(h.windows(2).all(|w| w[1] <= w[0]));
    assert!(h.iter().filter(|v| (0.8..=1.05).contains(*v)).count() >= 32);
}

#[test]
fn subspace_iteration_matches_full_svd() {
    // The iterative branch runs above 512 nodes; compare against nalgebra.
    let grid = SpatialGrid::new(16.0, 640).unwrap();
    let op = DenseOperator::assemble(&CzKernel::damped_hilbert(1.0), &grid);
    let fast = singular_spectrum(&op, 6, 2);
    let m = nalgebra::DMatrix::from_row_slice(640, 640, op.matrix());
    let mut full: Vec<f64> = m.singular_values().iter().copied().collect();
    full.sort_by(|a, b| b.total_cmp(a));
    for (a, b) in fast.iter().zip(&full) {
        assert!((a - b).abs() <= 1e-5 * full[0], "{a} vs {b}");
    }
}

#[test]
fn verdict_thresholds() {
    assert_eq!(trend_verdict(1.0, 1e-4, 1e-3, 0.1), Verdict::Vanishing);
    assert_eq!(trend_verdict(1.0, 0.5, 1e-3, 0.1), Verdict::NonVanishing);
    assert_eq!(trend_verdict(1.0, 0.01, 1e-3, 0.1), Verdict::Inconclusive);
    assert_eq!(trend_verdict(0.0, 0.0, 1e-3, 0.1), Verdict::Vanishing);
}
