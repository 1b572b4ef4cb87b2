mod common;

use common::Setup;
use czframe_core::localization::{
    anchor_field, apply_path, default_bundle, lemma_bound, matrix_coefficient, origin_tail_at, schur_sweep, schur_tail,
    schur_value, verify_decay, weak_compactness_profile, AnchorLattice, CoefficientPath, DecayBound,
};
use czframe_core::operators::double_sum;
use czframe_core::{CzKernel, FiniteRank, GroupPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn p(a: f64, b: f64) -> GroupPoint {
    GroupPoint::new(a, b).unwrap()
}

#[test]
fn decay_majorant_regimes() {
    let d = DecayBound::new(1.0, 1.0);
    assert!((lemma_bound(&d, 2.0, 0.0) - 0.353_553_390_593_273_8).abs() < 1e-15);
    assert!((lemma_bound(&d, 2.0, 4.0) - 0.088_388_347_648_318_4).abs() < 1e-15);
    assert!((lemma_bound(&d, 0.25, 0.5) - 0.125).abs() < 1e-15);
    assert!((lemma_bound(&d, 0.25, 2.0) - 0.125 / 4.0).abs() < 1e-15);
    assert_eq!(DecayBound::new(1.0, 3.0).eval(2.0, 0.0), 3.0 * lemma_bound(&d, 2.0, 0.0));
}

#[test]
fn hilbert_self_coefficient_vanishes() {
    let s = Setup::small();
    let c = matrix_coefficient(&CzKernel::hilbert(), s.psi.family(), &s.grid, GroupPoint::IDENTITY, GroupPoint::IDENTITY);
    assert_eq!(c.path, CoefficientPath::Apply);
    assert!(c.value.abs() <= 1e-9);
    assert!(!c.under_resolved);
}

#[test]
fn both_paths_agree_on_separated_supports() {
    let s = Setup::small();
    let fam = s.psi.family();
    let k = CzKernel::hilbert();
    let c = matrix_coefficient(&k, fam, &s.grid, p(1.0, 0.0), p(1.0, 8.0));
    assert_eq!(c.path, CoefficientPath::Direct);
    let other = apply_path(&k, &s.grid, &fam.element(p(1.0, 0.0), &s.grid), &fam.element(p(1.0, 8.0), &s.grid));
    assert!((c.value - other).abs() <= 1e-6 * c.value.abs(), "{} vs {other}", c.value);

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let kd = CzKernel::damped_hilbert(1.0);
    let mut checked = 0;
    while checked < 40 {
        let g = p(2f64.powf(rng.random_range(-2.0..1.5)), rng.random_range(-10.0..10.0));
        let h = p(2f64.powf(rng.random_range(-2.0..1.5)), rng.random_range(-10.0..10.0));
        let (eg, eh) = (fam.element(g, &s.grid), fam.element(h, &s.grid));
        if !(eg.end() < eh.start || eh.end() < eg.start) {
            continue;
        }
        let direct = double_sum(&kd, &s.grid, &eg, &eh);
        let applied = apply_path(&kd, &s.grid, &eg, &eh);
        assert!((direct - applied).abs() <= 1e-4 * direct.abs().max(1e-300));
        checked += 1;
    }
}

#[test]
fn zero_operator_is_silent() {
    let s = Setup::small();
    let z = CzKernel::zero();
    assert_eq!(matrix_coefficient(&z, s.psi.family(), &s.grid, p(1.0, 0.0), p(2.0, 0.5)).value, 0.0);
    assert_eq!(verify_decay(&z, &s.dict).c, 0.0);
    assert_eq!(schur_value(&z, &s.dict, GroupPoint::IDENTITY), 0.0);
    assert_eq!(schur_tail(&z, &s.dict, GroupPoint::IDENTITY, 2.0), 0.0);
    assert_eq!(origin_tail_at(&z, &s.dict, p(4.0, 3.0), 1.0), 0.0);
    let wc = weak_compactness_profile(&z, &s.dict, &default_bundle(s.psi.family(), &s.grid), 0.5);
    assert!(wc.values().iter().all(|v| *v == 0.0));
}

#[test]
fn hilbert_decay_fit_covers_every_node() {
    let s = Setup::reference();
    let fit = verify_decay(&CzKernel::hilbert(), &s.dict);
    assert!(fit.c.is_finite() && fit.c > 0.0);
    assert_eq!(fit.rows.len(), s.frame.len());
    assert!(fit.rows.iter().all(|r| r[2] <= fit.c * r[3] * (1.0 + 1e-12)));
    let k = s.frame.nearest(8.0, 0.0);
    let row = fit.rows[k];
    assert_eq!((row[0], row[1]), (8.0, 0.0));
    assert!(row[2] <= fit.c * 8f64.powf(-1.5));
    assert_eq!(fit.histogram.iter().map(|b| b.1).sum::<usize>(), fit.rows.iter().filter(|r| r[4] > 0.0).count());
}

#[test]
fn hilbert_schur_value_is_anchor_independent() {
    let s = Setup::reference();
    let k = CzKernel::hilbert();
    let base = schur_value(&k, &s.dict, p(1.0, 0.0));
    assert!(base.is_finite() && base > 0.0);
    for g in [p(2.0, 0.0), p(1.0, 5.0)] {
        let v = schur_value(&k, &s.dict, g);
        assert!((v - base).abs() <= 1e-10 * base, "{v} vs {base}");
    }
    let radii = [0.0, 1.0, 4.0, 6.0];
    let tails: Vec<f64> = radii.iter().map(|&r| schur_tail(&k, &s.dict, GroupPoint::IDENTITY, r)).collect();
    assert_eq!(tails[0], base);
    assert!(tails.windows(2).all(|w| w[1] <= w[0]));
    assert!(tails[2] < tails[1]);
    assert!(tails[1] >= 5.0 * tails[3]);
}

#[test]
fn origin_tails_separate_hilbert_from_finite_rank() {
    let s = Setup::small();
    let radii = [0.0, 1.0, 2.0, 4.0, 6.0, 8.0];
    let anchors = AnchorLattice::default().points();
    let h = schur_sweep(&CzKernel::hilbert(), &s.dict, &anchors, &radii);
    assert!(h.skipped_anchors.is_empty());
    assert!(h.origin_tail_sup.windows(2).all(|w| w[1] <= w[0]));
    // Far anchors carry their full local mass into every tail that does not
    // reach past them; the farthest default anchor sits at distance 7.7.
    assert!(h.origin_tail_sup[4] > 0.5 * h.origin_tail_sup[0], "{:?}", h.origin_tail_sup);
    for rec in &h.anchors {
        assert!(rec.schur_tails.windows(2).all(|w| w[1] <= w[0]));
        assert!(rec.origin_tails.windows(2).all(|w| w[1] <= w[0]));
    }

    let f = schur_sweep(&CzKernel::finite_rank(FiniteRank::default()), &s.dict, &anchors, &radii);
    assert!(!f.skipped_anchors.is_empty());
    let last = *f.origin_tail_sup.last().unwrap();
    assert!(last < 1e-3, "{:?}", f.origin_tail_sup);
}

#[test]
fn weak_compactness_dichotomy() {
    let s = Setup::small();
    let bundle = default_bundle(s.psi.family(), &s.grid);
    let h = weak_compactness_profile(&CzKernel::hilbert(), &s.dict, &bundle, 0.5);
    let v = h.values();
    let spread = v.iter().fold(0.0f64, |m, x| m.max((x - v[0]).abs()));
    assert!(spread <= 1e-8 * v[0], "{v:?}");
    let f = weak_compactness_profile(&CzKernel::finite_rank(FiniteRank::default()), &s.dict, &bundle, 0.5);
    assert!(f.skipped_nodes > 0);
    assert!(*f.values().last().unwrap() < 1e-4);
}

#[test]
fn anchor_field_at_identity_matches_pairings() {
    let s = Setup::small();
    let k = CzKernel::damped_hilbert(0.5);
    let field = anchor_field(&k, &s.dict, GroupPoint::IDENTITY);
    let fam = s.psi.family();
    for g in [p(1.0, 0.0), p(0.5, 2.0), p(4.0, -3.0)] {
        let idx = s.frame.nearest(g.a(), g.b());
        let node = s.frame.nodes()[idx].point();
        let c = matrix_coefficient(&k, fam, &s.grid, GroupPoint::IDENTITY, node).value;
        assert!((field.values()[idx] - c).abs() <= 1e-10 * (1.0 + c.abs()));
    }
}
