// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! Latent metric-probability spaces in polar coordinates.
//!
//! Every space is parametrized by an angle `theta` in `[-pi, pi)` and, for the
//! two-dimensional spaces, a radial coordinate `r` (geodesic distance to the
//! pole/origin; the colatitude on the sphere). The reference measure `mu` of a
//! space is its uniform probability measure.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{domain, invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceKind {
    UnitCircle,
    UnitDisk,
    Sphere,
    HyperbolicDisk,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LatentSpace {
    UnitCircle,
    UnitDisk,
    Sphere,
    HyperbolicDisk { radius: f64 },
}

/// Reduces an angle into `[-pi, pi)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let t = theta - TAU * ((theta + PI) / TAU).floor();
    if t >= PI {
        t - TAU
    } else if t < -PI {
        t + TAU
    } else {
        t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub theta: f64,
    /// Radial coordinate; `0` and ignored on the unit circle.
    #[serde(default)]
    pub r: f64,
}

impl Point {
    pub fn angle(theta: f64) -> Self {
        Self {
            theta: wrap_angle(theta),
            r: 0.0,
        }
    }

    pub fn polar(r: f64, theta: f64) -> Self {
        Self {
            theta: wrap_angle(theta),
            r,
        }
    }
}

/// Point with the trigonometric data every distance evaluation needs.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Prepared {
    pub theta: f64,
    pub r: f64,
    pub cos_t: f64,
    pub sin_t: f64,
    pub sinh_r: f64,
    pub sin_r: f64,
    pub cos_r: f64,
}

impl Prepared {
    pub fn new(p: &Point) -> Self {
        let (sin_t, cos_t) = p.theta.sin_cos();
        let (sin_r, cos_r) = p.r.sin_cos();
        Self {
            theta: p.theta,
            r: p.r,
            cos_t,
            sin_t,
            sinh_r: p.r.sinh(),
            sin_r,
            cos_r,
        }
    }

    /// `4 sin^2((theta_a - theta_b) / 2)`, the squared chord between the angles.
    fn chord2(&self, other: &Self) -> f64 {
        let dx = self.cos_t - other.cos_t;
        let dy = self.sin_t - other.sin_t;
        dx * dx + dy * dy
    }
}

impl LatentSpace {
    pub fn hyperbolic(radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(invalid(format!(
                "hyperbolic disk radius must be positive, got {radius}"
            )));
        }
        Ok(Self::HyperbolicDisk { radius })
    }

    pub fn kind(&self) -> SpaceKind {
        match self {
            Self::UnitCircle => SpaceKind::UnitCircle,
            Self::UnitDisk => SpaceKind::UnitDisk,
            Self::Sphere => SpaceKind::Sphere,
            Self::HyperbolicDisk { .. } => SpaceKind::HyperbolicDisk,
        }
    }

    pub fn is_circle(&self) -> bool {
        matches!(self, Self::UnitCircle)
    }

    /// Upper end of the radial coordinate (`None` on the circle).
    pub fn radial_extent(&self) -> Option<f64> {
        match *self {
            Self::UnitCircle => None,
            Self::UnitDisk => Some(1.0),
            Self::Sphere => Some(PI),
            Self::HyperbolicDisk { radius } => Some(radius),
        }
    }

    pub fn diameter(&self) -> f64 {
        match *self {
            Self::UnitCircle => PI,
            Self::UnitDisk => 2.0,
            Self::Sphere => PI,
            Self::HyperbolicDisk { radius } => 2.0 * radius,
        }
    }

    /// Raw (unnormalized) measure of the whole space.
    pub fn total_measure(&self) -> f64 {
        match *self {
            Self::UnitCircle => TAU,
            Self::UnitDisk => PI,
            Self::Sphere => 2.0 * TAU,
            Self::HyperbolicDisk { radius } => TAU * (radius.cosh() - 1.0),
        }
    }

    pub fn validate(&self, p: &Point) -> Result<()> {
        if !p.theta.is_finite() || !(-PI..PI).contains(&p.theta) {
            return Err(domain(format!("angle {} is not canonical in [-pi, pi)", p.theta)));
        }
        if let Some(extent) = self.radial_extent() {
            if !(p.r.is_finite() && p.r >= 0.0 && p.r <= extent) {
                return Err(domain(format!("radius {} outside [0, {extent}]", p.r)));
            }
        }
        Ok(())
    }

    pub fn distance(&self, p: &Point, q: &Point) -> Result<f64> {
        self.validate(p)?;
        self.validate(q)?;
        Ok(self.distance_prepared(&Prepared::new(p), &Prepared::new(q)))
    }

    /// Distance without domain validation.
    pub fn distance_unchecked(&self, p: &Point, q: &Point) -> f64 {
        self.distance_prepared(&Prepared::new(p), &Prepared::new(q))
    }

    pub(crate) fn distance_prepared(&self, a: &Prepared, b: &Prepared) -> f64 {
        match self {
            Self::UnitCircle => PI - (PI - (a.theta - b.theta).abs()).abs(),
            Self::UnitDisk => {
                // r1^2 + r2^2 - 2 r1 r2 cos(dt), written free of cancellation
                let dr = a.r - b.r;
                (dr * dr + a.r * b.r * a.chord2(b)).max(0.0).sqrt()
            }
            Self::Sphere => {
                let u = [a.sin_r * a.cos_t, a.sin_r * a.sin_t, a.cos_r];
                let v = [b.sin_r * b.cos_t, b.sin_r * b.sin_t, b.cos_r];
                let cross = [
                    u[1] * v[2] - u[2] * v[1],
                    u[2] * v[0] - u[0] * v[2],
                    u[0] * v[1] - u[1] * v[0],
                ];
                let sin = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
                let cos = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
                sin.atan2(cos)
            }
            Self::HyperbolicDisk { .. } => {
                // cosh d - 1 = 2 sinh^2((r1-r2)/2) + sinh r1 sinh r2 (1 - cos dt)
                let h = (0.5 * (a.r - b.r)).sinh();
                let t = (2.0 * h * h + 0.5 * a.sinh_r * b.sinh_r * a.chord2(b)).max(0.0);
                // arccosh(1 + t), clamped at t >= 0
                (t + (t * (t + 2.0)).sqrt()).ln_1p()
            }
        }
    }

    /// Raw measure of a ball of radius `alpha` in the model geometry
    /// (arc length on the circle).
    pub fn ball_measure(&self, alpha: f64) -> Result<f64> {
        if !(alpha >= 0.0) {
            return Err(domain(format!("ball radius must be non-negative, got {alpha}")));
        }
        Ok(match self {
            Self::UnitCircle => 2.0 * alpha.min(PI),
            Self::UnitDisk => PI * alpha * alpha,
            Self::Sphere => TAU * (1.0 - alpha.min(PI).cos()),
            Self::HyperbolicDisk { .. } => TAU * (alpha.cosh() - 1.0),
        })
    }

    /// Ball measure divided by the total measure, capped at 1 (the raw
    /// formula ignores the boundary of the bounded disks).
    pub fn ball_measure_normalized(&self, alpha: f64) -> Result<f64> {
        Ok((self.ball_measure(alpha)? / self.total_measure()).min(1.0))
    }

    /// Half-width of the angular window `{theta : d((r, theta), center) <= alpha}`
    /// on the ring of radius `r`. Returns a negative value when the ring misses
    /// the ball. Distance is non-decreasing in the angular gap on every space,
    /// so the window is always a single arc centred on `center.theta`.
    pub fn ring_half_angle(&self, r: f64, center: &Point, alpha: f64) -> f64 {
        let cos_window = match *self {
            Self::UnitCircle => return alpha.min(PI),
            Self::UnitDisk => {
                if r == 0.0 || center.r == 0.0 {
                    return if r.max(center.r) <= alpha { PI } else { -1.0 };
                }
                (r * r + center.r * center.r - alpha * alpha) / (2.0 * r * center.r)
            }
            Self::Sphere => {
                let denom = r.sin() * center.r.sin();
                if denom <= 0.0 {
                    let d = (r - center.r).abs().min(TAU - r - center.r);
                    return if d <= alpha { PI } else { -1.0 };
                }
                (alpha.cos() - r.cos() * center.r.cos()) / denom
            }
            Self::HyperbolicDisk { .. } => {
                if r == 0.0 || center.r == 0.0 {
                    return if r.max(center.r) <= alpha { PI } else { -1.0 };
                }
                // (cosh r cosh rc - cosh a) / (sinh r sinh rc), in a cancellation-free form
                let num = (r - center.r).cosh() - alpha.cosh();
                1.0 + num / (r.sinh() * center.r.sinh())
            }
        };
        if cos_window > 1.0 {
            -1.0
        } else if cos_window <= -1.0 {
            PI
        } else {
            cos_window.acos()
        }
    }

    /// Euclidean embedding used by the spatial edge index (Poincaré disk for
    /// the hyperbolic space).
    pub(crate) fn embed(&self, p: &Prepared) -> [f64; 3] {
        match self {
            Self::UnitCircle => [p.cos_t, p.sin_t, 0.0],
            Self::UnitDisk => [p.r * p.cos_t, p.r * p.sin_t, 0.0],
            Self::Sphere => [p.sin_r * p.cos_t, p.sin_r * p.sin_t, p.cos_r],
            Self::HyperbolicDisk { .. } => {
                let t = (0.5 * p.r).tanh();
                [t * p.cos_t, t * p.sin_t, 0.0]
            }
        }
    }

    /// Euclidean ball (in the embedding) containing the geodesic ball of
    /// radius `alpha` about `p`.
    pub(crate) fn embedded_ball(&self, p: &Prepared, alpha: f64) -> ([f64; 3], f64) {
        match self {
            Self::UnitCircle | Self::Sphere => {
                let chord = 2.0 * (0.5 * alpha.min(PI)).sin();
                (self.embed(p), chord)
            }
            Self::UnitDisk => (self.embed(p), alpha),
            Self::HyperbolicDisk { .. } => {
                // Hyperbolic circles are Euclidean circles in the Poincaré model;
                // along the ray through p they span [mobius(t - T), mobius(t + T)].
                let t = (0.5 * p.r).tanh();
                let tt = (0.5 * alpha).tanh();
                let lo = (t - tt) / (1.0 - t * tt);
                let hi = (t + tt) / (1.0 + t * tt);
                let c = 0.5 * (lo + hi);
                ([c * p.cos_t, c * p.sin_t, 0.0], 0.5 * (hi - lo))
            }
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            Self::UnitCircle => 1,
            _ => 2,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TOL: f64 = 1e-12;

    #[test]
    fn circle_examples() {
        let s = LatentSpace::UnitCircle;
        let d = s.distance(&Point::angle(0.0), &Point::angle(PI)).unwrap();
        assert!((d - PI).abs() < TOL);
        // shorter arc enumerated directly: |(-3) - 3| = 6 or 2pi - 6
        let direct = [6.0f64, TAU - 6.0].into_iter().fold(f64::INFINITY, f64::min);
        let d = s.distance(&Point::angle(-3.0), &Point::angle(3.0)).unwrap();
        assert!((d - direct).abs() < TOL);
        assert!((d - 0.283_185_307_179_586_2).abs() < 1e-12);
    }

    #[test]
    fn disk_and_hyperbolic_examples() {
        let d = LatentSpace::UnitDisk
            .distance(&Point::polar(0.5, 0.0), &Point::polar(0.5, PI))
            .unwrap();
        assert!((d - 1.0).abs() < TOL);
        let h = LatentSpace::hyperbolic(3.0).unwrap();
        let d = h.distance(&Point::polar(1.0, 0.0), &Point::polar(0.0, 2.3)).unwrap();
        assert!((d - 1.0).abs() < TOL);
    }

    #[test]
    fn hyperbolic_matches_textbook_formula_when_well_conditioned() {
        let h = LatentSpace::hyperbolic(5.0).unwrap();
        let (p, q) = (Point::polar(1.2, 0.4), Point::polar(2.1, -1.9));
        let textbook = (p.r.cosh() * q.r.cosh() - p.r.sinh() * q.r.sinh() * (p.theta - q.theta).cos()).acosh();
        assert!((h.distance(&p, &q).unwrap() - textbook).abs() < 1e-12);
    }

    #[test]
    fn sphere_matches_table_formula() {
        let (p, q) = (Point::polar(0.7, 0.3), Point::polar(2.0, -2.5));
        let table = (p.r.cos() * q.r.cos() + p.r.sin() * q.r.sin() * (p.theta - q.theta).cos()).acos();
        assert!((LatentSpace::Sphere.distance(&p, &q).unwrap() - table).abs() < 1e-12);
    }

    #[test]
    fn nearby_hyperbolic_points_keep_precision() {
        let h = LatentSpace::hyperbolic(12.0).unwrap();
        let p = Point::polar(11.0, 0.1);
        let q = Point::polar(11.0 + 1e-9, 0.1);
        let gap = q.r - p.r;
        assert!((h.distance(&p, &q).unwrap() - gap).abs() < 1e-6 * gap);
    }

    #[test]
    fn ball_measure_examples() {
        assert!((LatentSpace::UnitDisk.ball_measure(1.0).unwrap() - PI).abs() < TOL);
        assert_eq!(LatentSpace::hyperbolic(2.0).unwrap().ball_measure(0.0).unwrap(), 0.0);
        let sphere = LatentSpace::Sphere.ball_measure(PI).unwrap();
        assert!((sphere - 4.0 * PI).abs() < TOL);
        assert!((sphere - TAU * (1.0 - PI.cos())).abs() < TOL);
        assert!(LatentSpace::Sphere.ball_measure(-0.1).is_err());
        assert!((LatentSpace::UnitCircle.ball_measure_normalized(0.5).unwrap() - 0.5 / PI).abs() < TOL);
    }

    #[test]
    fn normalized_ball_measure_reaches_one_at_diameter() {
        for s in spaces() {
            let v = s.ball_measure_normalized(s.diameter()).unwrap();
            assert!((v - 1.0).abs() < TOL, "{s:?}");
        }
    }

    #[test]
    fn out_of_domain_points_rejected() {
        assert!(LatentSpace::UnitDisk
            .distance(&Point::polar(1.5, 0.0), &Point::polar(0.0, 0.0))
            .is_err());
        let bad = Point { theta: 4.0, r: 0.0 };
        assert!(LatentSpace::UnitCircle.distance(&bad, &Point::angle(0.0)).is_err());
    }

    #[test]
    fn wrap_is_canonical() {
        assert_eq!(wrap_angle(PI), -PI);
        assert!((wrap_angle(3.0 * PI + 0.25) - (-PI + 0.25)).abs() < 1e-12);
        assert!((wrap_angle(-7.0) - (-7.0 + TAU)).abs() < 1e-12);
    }

    #[test]
    fn ring_window_matches_bisection_on_distance() {
        let h = LatentSpace::hyperbolic(4.0).unwrap();
        for s in [LatentSpace::UnitDisk, LatentSpace::Sphere, h] {
            let extent = s.radial_extent().unwrap();
            let c = Point::polar(0.37 * extent, 0.2);
            let alpha = 0.3 * extent;
            for k in 1..20 {
                let r = extent * k as f64 / 20.0;
                let w = s.ring_half_angle(r, &c, alpha);
                let d0 = s.distance_unchecked(&Point::polar(r, 0.2), &c);
                let dpi = s.distance_unchecked(&Point::polar(r, 0.2 + PI), &c);
                if d0 > alpha {
                    assert!(w < 0.0);
                } else if dpi <= alpha {
                    assert!((w - PI).abs() < 1e-12);
                } else {
                    let edge = s.distance_unchecked(&Point::polar(r, 0.2 + w), &c);
                    assert!((edge - alpha).abs() < 1e-7, "{s:?} r={r} edge={edge}");
                }
            }
        }
    }

    fn spaces() -> Vec<LatentSpace> {
        vec![
            LatentSpace::UnitCircle,
            LatentSpace::UnitDisk,
            LatentSpace::Sphere,
            LatentSpace::hyperbolic(3.0).unwrap(),
        ]
    }

    fn point_in(s: LatentSpace, u: f64, t: f64) -> Point {
        match s.radial_extent() {
            None => Point::angle(t),
            Some(e) => Point::polar(u * e, t),
        }
    }

    proptest! {
        #[test]
        fn metric_axioms(si in 0usize..4, u1 in 0.0..1.0f64, t1 in -PI..PI, u2 in 0.0..1.0f64,
                         t2 in -PI..PI, u3 in 0.0..1.0f64, t3 in -PI..PI) {
            let s = spaces()[si];
            let (p, q, w) = (point_in(s, u1, t1), point_in(s, u2, t2), point_in(s, u3, t3));
            let pq = s.distance(&p, &q).unwrap();
            prop_assert!((pq - s.distance(&q, &p).unwrap()).abs() < TOL);
            prop_assert!(pq >= 0.0 && pq <= s.diameter() + TOL);
            prop_assert!(s.distance(&p, &p).unwrap().abs() < TOL);
            let pw = s.distance(&p, &w).unwrap();
            let qw = s.distance(&q, &w).unwrap();
            prop_assert!(pw <= pq + qw + TOL);
            if s.is_circle() {
                prop_assert!(pq <= PI);
            }
        }

        #[test]
        fn ball_measure_monotone(si in 0usize..4, a in 0.0..3.0f64, b in 0.0..3.0f64) {
            let s = spaces()[si];
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(s.ball_measure(lo).unwrap() <= s.ball_measure(hi).unwrap());
            prop_assert!(s.ball_measure_normalized(lo).unwrap() <= s.ball_measure_normalized(hi).unwrap());
        }
    }
}
