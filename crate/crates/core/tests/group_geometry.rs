mod common;

use common::simpson;
use czframe_core::group::{haar_ball_volume, hyperbolic_disk_area, in_cone, in_tent, Cone, Tent};
use czframe_core::GroupPoint;
use proptest::prelude::*;

fn point() -> impl Strategy<Value = GroupPoint> {
    (-2.3f64..2.3, -10.0f64..10.0).prop_map(|(la, b)| GroupPoint::new(la.exp(), b).unwrap())
}

fn close(x: f64, y: f64, scale: f64) -> bool {
    (x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(scale)
}

fn same(g: GroupPoint, h: GroupPoint, scale: f64) -> bool {
    close(g.a(), h.a(), 1.0) && close(g.b(), h.b(), scale)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn associativity(g in point(), h in point(), k in point()) {
        let scale = 1.0 + g.b().abs() + g.a() * (h.b().abs() + h.a() * k.b().abs());
        prop_assert!(same((g * h) * k, g * (h * k), scale));
    }

    #[test]
    fn identity_and_inverse(g in point()) {
        prop_assert_eq!(GroupPoint::IDENTITY * g, g);
        prop_assert_eq!(g * GroupPoint::IDENTITY, g);
        let scale = 1.0 + g.b().abs();
        prop_assert!(same(g * g.inverse(), GroupPoint::IDENTITY, scale));
        prop_assert!(same(g.inverse() * g, GroupPoint::IDENTITY, scale));
    }

    #[test]
    fn metric_axioms(x in point(), y in point(), z in point()) {
        let (dxy, dyx) = (x.dist(&y), y.dist(&x));
        prop_assert!(dxy >= 0.0);
        prop_assert!(close(dxy, dyx, 1e-300));
        prop_assert_eq!(x.dist(&x), 0.0);
        prop_assert!(dxy <= x.dist(&z) + z.dist(&y) + 1e-12 * (1.0 + dxy));
    }

    #[test]
    fn left_invariance(g in point(), x in point(), y in point()) {
        let d = x.dist(&y);
        prop_assume!(d > 1e-3);
        let dg = (g * x).dist(&(g * y));
        prop_assert!((dg - d).abs() <= 1e-12 * d, "{} vs {}", dg, d);
    }

    #[test]
    fn tents_nest(c in -5.0f64..5.0, r in 0.1f64..5.0, extra in 0.0f64..3.0, g in point()) {
        let small = Tent::new(c, r).unwrap();
        let big = Tent::new(c, r + extra).unwrap();
        prop_assert!(!in_tent(&g, &small) || in_tent(&g, &big));
    }

    #[test]
    fn cone_ball_duality(x in -10.0f64..10.0, g in point()) {
        prop_assert_eq!(in_cone(&g, &Cone::new(x)), (x - g.b()).abs() < g.a());
    }
}

#[test]
fn product_and_inverse_examples() {
    let g = GroupPoint::new(2.0, 3.0).unwrap() * GroupPoint::new(0.5, -1.0).unwrap();
    assert_eq!((g.a(), g.b()), (1.0, 1.0));
    let h = GroupPoint::new(4.0, -2.0).unwrap();
    assert_eq!(h * GroupPoint::new(0.25, 0.5).unwrap(), GroupPoint::IDENTITY);
}

#[test]
fn distance_along_geodesic_matches_arc_length() {
    // ds = da / a along b = 0.
    let e = std::f64::consts::E;
    let arc = simpson(|t| 1.0 / t, 1.0, e, 2000);
    let d = GroupPoint::IDENTITY.dist(&GroupPoint::new(e, 0.0).unwrap());
    assert!((arc - 1.0).abs() < 1e-12);
    assert!((d - arc).abs() < 1e-12, "{d}");
}

#[test]
fn unit_disk_volume_matches_radial_integral() {
    // Hyperbolic polar coordinates: area element sinh r dr dθ.
    let oracle = simpson(|r| 2.0 * std::f64::consts::PI * r.sinh(), 0.0, 1.0, 1000);
    assert!((oracle - 3.412_276_3).abs() < 1e-6, "{oracle}");
    let v = haar_ball_volume(1.0).unwrap();
    assert!((v.value - oracle).abs() / oracle < 0.01, "{v:?}");
    assert!(v.error_estimate < 0.01 * oracle);
    assert!((hyperbolic_disk_area(1.0) - oracle).abs() < 1e-9);
}

#[test]
fn disk_volume_is_monotone_and_euclidean_near_zero() {
    let v1 = haar_ball_volume(1.0).unwrap().value;
    let v2 = haar_ball_volume(2.0).unwrap().value;
    assert!(v2 > v1);
    let r = 0.02;
    let v = haar_ball_volume(r).unwrap().value;
    assert!((v / (std::f64::consts::PI * r * r) - 1.0).abs() < 0.01);
    assert!(haar_ball_volume(0.0).is_err());
}

#[test]
fn membership_examples() {
    let t = Tent::new(0.0, 1.0).unwrap();
    assert!(in_tent(&GroupPoint::new(0.5, 0.0).unwrap(), &t));
    assert!(!in_tent(&GroupPoint::new(0.5, 0.6).unwrap(), &t));
    assert!(in_cone(&GroupPoint::new(1.0, 0.5).unwrap(), &Cone::new(0.4)));
}
