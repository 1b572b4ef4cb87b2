mod common;

use common::Setup;
use czframe_core::operators::{cz_scan, find_model};
use czframe_core::{
    apply, compute_t1, compute_t1_star, inner_product, model_zoo, CoreError, CzKernel, DenseOperator, FiniteRank,
    GroupPoint, SampledFunction, SpatialGrid,
};
use proptest::prelude::*;

const INV_PI: f64 = std::f64::consts::FRAC_1_PI;

fn lorentzian(grid: SpatialGrid) -> SampledFunction {
    grid.sample(|y| 1.0 / (1.0 + y * y))
}

/// Relative L² error of `u` against `v` over nodes with `|x| <= r`.
fn window_error(u: &SampledFunction, v: impl Fn(f64) -> f64, r: f64) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for (x, y) in u.grid().nodes().iter().zip(u.values()) {
        if x.abs() <= r {
            num += (y - v(*x)).powi(2);
            den += v(*x).powi(2);
        }
    }
    (num / den).sqrt()
}

#[test]
fn hilbert_kernel_value() {
    assert_eq!(CzKernel::hilbert().eval(1.0, 0.0), INV_PI);
    assert_eq!(find_model("hilbert").unwrap().kernel, CzKernel::hilbert());
    assert!(find_model("riesz").is_none());
}

#[test]
fn zoo_passes_declared_constants() {
    for m in model_zoo() {
        let scan = cz_scan(&m.kernel, 10_000, 40.0, 11);
        assert!(scan.passed, "{}: {scan:?}", m.label);
    }
    let damped = cz_scan(&CzKernel::damped_hilbert(1.0), 10_000, 40.0, 3);
    assert!(damped.size_ratio <= INV_PI * (1.0 + 1e-12), "{damped:?}");
    let fr = CzKernel::finite_rank(FiniteRank::default());
    assert_eq!(fr.constants().delta, 1.0);
    assert!(cz_scan(&fr, 10_000, 4.0, 5).passed);
}

#[test]
fn hilbert_of_lorentzian_matches_residue_formula() {
    let grid = SpatialGrid::new(32.0, 2048).unwrap();
    let hf = apply(&CzKernel::hilbert(), &lorentzian(grid)).unwrap();
    let closed = |x: f64| x / (1.0 + x * x);
    assert!(window_error(&hf, closed, 16.0) < 0.02);

    // Eight times finer lattice, restricted to the coarse nodes.
    let fine = grid.refined(8);
    let hfine = apply(&CzKernel::hilbert(), &lorentzian(fine)).unwrap();
    let coarse_of_fine = SampledFunction::new(grid, hfine.values().iter().step_by(8).copied().collect()).unwrap();
    let oracle = |x: f64| coarse_of_fine.values()[grid.floor_index(x + 1e-9) as usize];
    assert!(window_error(&hf, oracle, 16.0) < 0.02);
    assert!(window_error(&coarse_of_fine, closed, 16.0) < window_error(&hf, closed, 16.0));
}

#[test]
fn hilbert_maps_even_to_odd() {
    let grid = SpatialGrid::new(16.0, 512).unwrap();
    let hf = apply(&CzKernel::hilbert(), &grid.sample(|y| (-y * y).exp())).unwrap();
    let v = hf.values();
    // x_i and x_{N-i} are mirror images.
    let defect = (1..grid.len()).map(|i| (v[i] + v[grid.len() - i]).abs()).fold(0.0, f64::max);
    assert!(defect <= 1e-10, "{defect}");
}

#[test]
fn finite_rank_is_separable() {
    let grid = SpatialGrid::new(16.0, 512).unwrap();
    let rank = FiniteRank::default();
    let f = grid.sample(|y| (y - 0.2).cos());
    let tf = apply(&CzKernel::finite_rank(rank), &f).unwrap();
    let pairing = inner_product(&f, &grid.sample(|y| rank.v(y))).unwrap();
    let expected = grid.sample(|x| rank.u(x)).scaled(pairing);
    assert!(tf.relative_error(&expected).unwrap() < 1e-12);

    let t1 = compute_t1(&CzKernel::finite_rank(rank), &grid, 1.0).unwrap();
    let mass: f64 = grid.nodes().iter().map(|&y| rank.v(y)).sum::<f64>() * grid.spacing();
    let expected = grid.sample(|x| rank.u(x)).scaled(mass);
    assert!(t1.values.relative_error(&expected).unwrap() < 1e-9);
    // The support of v sits inside every window, so nothing is truncated.
    assert_eq!(t1.tail_bound, 0.0);
    let far = CzKernel::finite_rank(rank).conjugate(GroupPoint::new(1.0, 100.0).unwrap());
    assert!(compute_t1(&far, &grid, 1.0).unwrap().tail_bound > 0.0);
}

#[test]
fn t1_profiles() {
    let grid = SpatialGrid::new(32.0, 2048).unwrap();
    let h = compute_t1(&CzKernel::hilbert(), &grid, 0.05).unwrap();
    assert!(h.values.sup_norm() <= 1e-9);
    assert!(h.tail_bound <= 0.05);

    let d = compute_t1(&CzKernel::damped_hilbert(1.0), &grid, 0.05).unwrap();
    let v = d.values.values();
    let n = grid.len();
    let defect = (1..n).map(|i| (v[i] + v[n - i]).abs()).fold(0.0, f64::max);
    assert!(defect <= 1e-9, "{defect}");
    assert!(d.values.sup_norm() > 0.1);
    // The damped kernel is antisymmetric, so the transposed profile is -T1.
    let ds = compute_t1_star(&CzKernel::damped_hilbert(1.0), &grid, 0.05).unwrap();
    assert!(ds.values.add(&d.values).unwrap().sup_norm() <= 1e-12);

    match compute_t1(&CzKernel::hilbert(), &grid, 1e-4) {
        Err(CoreError::Truncation { estimate, .. }) => assert!(estimate > 1e-4),
        other => panic!("expected a truncation failure, got {other:?}"),
    }
}

#[test]
fn conjugation_examples() {
    let h = CzKernel::hilbert();
    let g = GroupPoint::new(3.0, -1.5).unwrap();
    let d = CzKernel::damped_hilbert(1.0);
    for (x, y) in [(0.3, 1.7), (-2.0, 5.0), (10.0, -0.1)] {
        assert!((h.conjugate(g).eval(x, y) - h.eval(x, y)).abs() <= 1e-15 * h.eval(x, y).abs().max(1.0));
        assert_eq!(d.conjugate(GroupPoint::IDENTITY).eval(x, y), d.eval(x, y));
    }
    let v = d.conjugate(GroupPoint::new(2.0, 0.0).unwrap()).eval(1.0, 0.0);
    assert!((v - 1.0 / (std::f64::consts::PI * 5f64.sqrt())).abs() < 1e-15);
    assert_eq!(h.conjugate(g).constants(), h.constants());
    assert!(d.conjugate(g).antisymmetric());
}

#[test]
fn adjoint_identity_on_disjoint_supports() {
    let grid = SpatialGrid::new(16.0, 1024).unwrap();
    let f = grid.sample(|y| (-(y + 4.0) * (y + 4.0) * 4.0).exp());
    let g = grid.sample(|y| (-(y - 3.0) * (y - 3.0) * 2.0).exp());
    for k in [CzKernel::damped_hilbert(0.5), CzKernel::finite_rank(FiniteRank::default())] {
        let lhs = inner_product(&apply(&k, &f).unwrap(), &g).unwrap();
        let rhs = inner_product(&f, &apply(&k.transpose(), &g).unwrap()).unwrap();
        assert!((lhs - rhs).abs() <= 0.01 * lhs.abs().max(1e-14), "{lhs} vs {rhs}");
    }
}

#[test]
fn conjugation_covariance_of_coefficients() {
    let s = Setup::reference();
    let kernel = CzKernel::damped_hilbert(1.0);
    let anchor = GroupPoint::new(2.0, 1.0).unwrap();
    let source = s.psi.family().box_element(anchor, &s.grid);
    let t_source = apply(&kernel, &source).unwrap();
    let reduced = czframe_core::localization::anchor_field(&kernel, &s.dict, anchor);
    let (mut num, mut den) = (0.0, 0.0);
    for (k, n) in s.frame.nodes().iter().enumerate().step_by(37) {
        if n.a < 0.25 || n.a > 4.0 || n.b.abs() > 4.0 {
            continue;
        }
        let g = anchor * n.point();
        let target = s.psi.family().box_element(g, &s.grid);
        let direct = inner_product(&t_source, &target).unwrap();
        num += (direct - reduced.values()[k]).powi(2);
        den += direct * direct;
    }
    assert!(den > 0.0);
    assert!((num / den).sqrt() <= 0.02, "{}", (num / den).sqrt());
}

#[test]
fn dense_operator_matches_direct_application() {
    let grid = SpatialGrid::new(8.0, 256).unwrap();
    let f = grid.sample(|y| (-(y - 1.0) * (y - 1.0)).exp() * y.sin());
    let g = grid.sample(|y| (y * 0.7).cos() / (1.0 + y * y));
    for m in model_zoo() {
        let dense = DenseOperator::assemble(&m.kernel, &grid);
        let a = dense.apply(&f).unwrap();
        let b = apply(&m.kernel, &f).unwrap();
        assert!(a.sub(&b).unwrap().sup_norm() <= 1e-12 * (1.0 + b.sup_norm()), "{}", m.label);
        let lhs = inner_product(&a, &g).unwrap();
        let rhs = inner_product(&f, &dense.apply_adjoint(&g).unwrap()).unwrap();
        assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }
}

fn group_point() -> impl Strategy<Value = GroupPoint> {
    (-1.5f64..1.5, -3.0f64..3.0).prop_map(|(la, b)| GroupPoint::new(la.exp(), b).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn conjugation_composes(g in group_point(), k in group_point(), x in -3.0f64..3.0, y in -3.0f64..3.0) {
        prop_assume!((x - y).abs() > 1e-3);
        let base = CzKernel::damped_hilbert(1.0);
        let twice = base.conjugate(g).conjugate(k).eval(x, y);
        let once = base.conjugate(g * k).eval(x, y);
        prop_assert!((twice - once).abs() <= 1e-11 * once.abs().max(1e-300));
    }

    #[test]
    fn transpose_commutes_with_conjugation(g in group_point(), x in -3.0f64..3.0, y in -3.0f64..3.0) {
        let base = CzKernel::finite_rank(FiniteRank::default());
        prop_assert_eq!(base.transpose().conjugate(g).eval(x, y), base.conjugate(g).transpose().eval(x, y));
        prop_assert_eq!(base.transpose().eval(x, y), base.eval(y, x));
    }

    #[test]
    fn zoo_antisymmetry(x in -10.0f64..10.0, y in -10.0f64..10.0) {
        prop_assume!(x != y);
        for m in model_zoo().into_iter().filter(|m| m.kernel.antisymmetric()) {
            let (k, kt) = (m.kernel.eval(x, y), m.kernel.eval(y, x));
            prop_assert!((k + kt).abs() <= 1e-15 * k.abs());
        }
    }
}
