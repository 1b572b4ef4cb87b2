//! Arithmetic and hyperbolic geometry of the ax+b group in one dimension.
//!
//! Points are pairs `(a, b)` with scale `a > 0` and translation `b`. The
//! product is `(a, b) * (a', b') = (a a', a b' + b)`, the metric is the
//! Poincaré half-plane metric `ds² = (da² + db²) / a²`, and the left Haar
//! measure is `da db / a²`.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupPoint {
    a: f64,
    b: f64,
}

impl GroupPoint {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() || !b.is_finite() {
            return Err(CoreError::NonPositiveScale(a));
        }
        Ok(Self { a, b })
    }

    /// Builds a point the caller already knows to be valid.
    pub(crate) fn raw(a: f64, b: f64) -> Self {
        debug_assert!(a > 0.0);
        Self { a, b }
    }

    pub const IDENTITY: GroupPoint = GroupPoint { a: 1.0, b: 0.0 };

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn inverse(&self) -> Self {
        Self {
            a: 1.0 / self.a,
            b: -self.b / self.a,
        }
    }

    pub fn dist(&self, other: &GroupPoint) -> f64 {
        dist(self, other)
    }

    /// Distance to the identity `(1, 0)`.
    pub fn dist_to_identity(&self) -> f64 {
        dist(self, &Self::IDENTITY)
    }
}

impl std::ops::Mul for GroupPoint {
    type Output = GroupPoint;

    fn mul(self, rhs: GroupPoint) -> GroupPoint {
        mul(&self, &rhs)
    }
}

pub fn mul(g: &GroupPoint, h: &GroupPoint) -> GroupPoint {
    GroupPoint {
        a: g.a * h.a,
        b: g.a * h.b + g.b,
    }
}

/// Hyperbolic distance.
///
/// Uses `d = 2 asinh(sqrt(|b-b'|² + (a-a')²) / (2 sqrt(a a')))`, which equals
/// the `acosh` closed form but keeps full relative precision for nearby
/// points.
pub fn dist(g: &GroupPoint, h: &GroupPoint) -> f64 {
    let db = g.b - h.b;
    let da = g.a - h.a;
    let chord = db.hypot(da);
    2.0 * (chord / (2.0 * (g.a * h.a).sqrt())).asinh()
}

/// Carleson tent over the ball `B(center, radius)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tent {
    pub center: f64,
    pub radius: f64,
}

impl Tent {
    pub fn new(center: f64, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(CoreError::NonPositiveRadius(radius));
        }
        Ok(Self { center, radius })
    }

    pub fn contains(&self, g: &GroupPoint) -> bool {
        in_tent(g, self)
    }
}

/// Cone `V_x = {(a, b) : |x - b| < a}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cone {
    pub vertex: f64,
}

impl Cone {
    pub fn new(vertex: f64) -> Self {
        Self { vertex }
    }

    pub fn contains(&self, g: &GroupPoint) -> bool {
        in_cone(g, self)
    }
}

pub fn in_tent(g: &GroupPoint, t: &Tent) -> bool {
    (t.center - g.b).abs() < t.radius - g.a
}

pub fn in_cone(g: &GroupPoint, c: &Cone) -> bool {
    (c.vertex - g.b).abs() < g.a
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HaarVolume {
    pub value: f64,
    /// Difference between the full and the half-resolution quadrature.
    pub error_estimate: f64,
}

/// Haar measure of the disk `D((1,0), R)`.
pub fn haar_ball_volume(radius: f64) -> Result<HaarVolume> {
    haar_ball_volume_with(radius, 1024)
}

/// Haar disk volume from a `cells × cells` midpoint rule in `(log a, b)`.
pub fn haar_ball_volume_with(radius: f64, cells: usize) -> Result<HaarVolume> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(CoreError::NonPositiveRadius(radius));
    }
    let cells = cells.max(8);
    let fine = midpoint_disk(radius, cells);
    let coarse = midpoint_disk(radius, cells / 2);
    Ok(HaarVolume {
        value: fine,
        error_estimate: (fine - coarse).abs(),
    })
}

fn midpoint_disk(radius: f64, cells: usize) -> f64 {
    // The disk spans log a in [-R, R] and |b| <= sinh R.
    let c = radius.cosh() - 1.0;
    let du = 2.0 * radius / cells as f64;
    let half_b = radius.sinh();
    let db = 2.0 * half_b / cells as f64;
    (0..cells)
        .map(|i| {
            let u = -radius + (i as f64 + 0.5) * du;
            let a = u.exp();
            let reach = 2.0 * a * c - (a - 1.0) * (a - 1.0);
            let count = (0..cells)
                .filter(|&k| {
                    let b = -half_b + (k as f64 + 0.5) * db;
                    b * b < reach
                })
                .count();
            count as f64 * du * db / a
        })
        .sum()
}

/// Closed-form hyperbolic disk area `2π(cosh R - 1)`.
pub fn hyperbolic_disk_area(radius: f64) -> f64 {
    2.0 * std::f64::consts::PI * (radius.cosh() - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(a: f64, b: f64) -> GroupPoint {
        GroupPoint::new(a, b).unwrap()
    }

    #[test]
    fn product_examples() {
        assert_eq!(p(2.0, 3.0) * p(0.5, -1.0), p(1.0, 1.0));
        let g = p(3.5, -2.25);
        assert_eq!(GroupPoint::IDENTITY * g, g);
        let e = g * g.inverse();
        assert!((e.a() - 1.0).abs() < 1e-15 && e.b().abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_scale() {
        assert!(GroupPoint::new(0.0, 1.0).is_err());
        assert!(GroupPoint::new(-1.0, 1.0).is_err());
        assert!(GroupPoint::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn distance_along_scale_axis() {
        assert_eq!(dist(&p(1.0, 0.0), &p(1.0, 0.0)), 0.0);
        assert!((dist(&p(1.0, 0.0), &p(std::f64::consts::E, 0.0)) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn distance_matches_acosh_form() {
        let g = p(0.7, 1.3);
        let h = p(2.9, -4.0);
        let q = 1.0 + ((g.b() - h.b()).powi(2) + (g.a() - h.a()).powi(2)) / (2.0 * g.a() * h.a());
        assert!((dist(&g, &h) - q.acosh()).abs() < 1e-13);
    }

    #[test]
    fn membership_examples() {
        let t = Tent::new(0.0, 1.0).unwrap();
        assert!(p(0.5, 0.0).is_in(&t));
        assert!(!p(0.5, 0.6).is_in(&t));
        assert!(!p(1.0, 0.0).is_in(&t));
        assert!(in_cone(&p(1.0, 0.5), &Cone::new(0.4)));
        assert!(Tent::new(0.0, 0.0).is_err());
    }

    impl GroupPoint {
        fn is_in(&self, t: &Tent) -> bool {
            in_tent(self, t)
        }
    }

    #[test]
    fn haar_volume_unit_disk() {
        let v = haar_ball_volume(1.0).unwrap();
        let exact = hyperbolic_disk_area(1.0);
        assert!((v.value - exact).abs() / exact < 0.01, "{v:?} vs {exact}");
        assert!(v.error_estimate < 0.05 * exact);
        assert!(haar_ball_volume(2.0).unwrap().value > v.value);
    }

    #[test]
    fn haar_volume_small_radius_is_euclidean() {
        let r = 0.02;
        let v = haar_ball_volume(r).unwrap();
        let ratio = v.value / (std::f64::consts::PI * r * r);
        assert!((ratio - 1.0).abs() < 0.01, "{ratio}");
    }
}
