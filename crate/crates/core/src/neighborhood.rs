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

//! Continuous neighbourhood model: the radius field `alpha(x)` and the
//! normalized volumes `mu(N(x))` of `N(x) = {y : d(x, y) <= max(alpha(x), alpha(y))}`.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::density::{ball_probability, AngularDensity, BallMethod};
use crate::error::{Error, Result};
use crate::geometry::{wrap_angle, LatentSpace, Point};
use crate::graphgen::GeometricGraph;

/// Neighbourhood radius as a function on the space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadiusField {
    Constant {
        alpha: f64,
    },
    /// `alpha + beta` inside the union of `epsilon`-balls about the seeds,
    /// `alpha` elsewhere.
    Hubs {
        alpha: f64,
        beta: f64,
        epsilon: f64,
        seeds: Vec<Point>,
    },
}

impl RadiusField {
    pub fn constant(alpha: f64) -> Self {
        Self::Constant { alpha }
    }

    /// Field that generated `g` (constant when it has no hub seeds).
    pub fn from_graph(g: &GeometricGraph) -> Self {
        if g.hub_seeds.is_empty() {
            Self::Constant { alpha: g.alpha }
        } else {
            Self::Hubs {
                alpha: g.alpha,
                beta: g.beta,
                epsilon: g.epsilon,
                seeds: g.hub_seed_points(),
            }
        }
    }

    pub fn base(&self) -> f64 {
        match self {
            Self::Constant { alpha } | Self::Hubs { alpha, .. } => *alpha,
        }
    }

    pub fn is_hub(&self, space: &LatentSpace, x: &Point) -> bool {
        match self {
            Self::Constant { .. } => false,
            Self::Hubs { epsilon, seeds, .. } => seeds.iter().any(|s| space.distance_unchecked(x, s) <= *epsilon),
        }
    }

    pub fn radius_at(&self, space: &LatentSpace, x: &Point) -> f64 {
        match self {
            Self::Constant { alpha } => *alpha,
            Self::Hubs { alpha, beta, .. } => {
                if self.is_hub(space, x) {
                    alpha + beta
                } else {
                    *alpha
                }
            }
        }
    }
}

/// Finite union of closed arcs of the circle, stored as disjoint sorted
/// intervals inside `[-pi, pi]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ArcSet {
    arcs: Vec<(f64, f64)>,
}

impl ArcSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn full() -> Self {
        Self { arcs: vec![(-PI, PI)] }
    }

    /// Closed arc `[center - half_width, center + half_width]`, split at the
    /// cut `-pi = pi` when it wraps.
    pub fn ball(center: f64, half_width: f64) -> Self {
        if half_width < 0.0 {
            return Self::empty();
        }
        if half_width >= PI {
            return Self::full();
        }
        let c = wrap_angle(center);
        let (lo, hi) = (c - half_width, c + half_width);
        let raw = if lo < -PI {
            vec![(-PI, hi), (lo + TAU, PI)]
        } else if hi > PI {
            vec![(-PI, hi - TAU), (lo, PI)]
        } else {
            vec![(lo, hi)]
        };
        Self::normalized(raw)
    }

    fn normalized(mut raw: Vec<(f64, f64)>) -> Self {
        raw.retain(|(a, b)| a <= b);
        raw.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut arcs: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
        for (a, b) in raw {
            match arcs.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => arcs.push((a, b)),
            }
        }
        Self { arcs }
    }

    pub fn arcs(&self) -> &[(f64, f64)] {
        &self.arcs
    }

    pub fn union(&self, other: &Self) -> Self {
        Self::normalized(self.arcs.iter().chain(&other.arcs).copied().collect())
    }

    pub fn intersect(&self, other: &Self) -> Self {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.arcs.len() && j < other.arcs.len() {
            let (a0, a1) = self.arcs[i];
            let (b0, b1) = other.arcs[j];
            let lo = a0.max(b0);
            let hi = a1.min(b1);
            if lo <= hi {
                out.push((lo, hi));
            }
            if a1 < b1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self::normalized(out)
    }

    /// Total arc length.
    pub fn length(&self) -> f64 {
        self.arcs.iter().map(|(a, b)| b - a).sum()
    }

    pub fn contains(&self, theta: f64) -> bool {
        let t = wrap_angle(theta);
        self.arcs.iter().any(|&(a, b)| a <= t && t <= b)
    }

    /// Breakpoints of the set, useful for piecewise quadrature.
    pub fn endpoints(&self) -> impl Iterator<Item = f64> + '_ {
        self.arcs.iter().flat_map(|&(a, b)| [a, b])
    }
}

/// Hub region on the circle.
pub fn hub_arcs(field: &RadiusField) -> ArcSet {
    match field {
        RadiusField::Constant { .. } => ArcSet::empty(),
        RadiusField::Hubs { epsilon, seeds, .. } => seeds
            .iter()
            .fold(ArcSet::empty(), |acc, s| acc.union(&ArcSet::ball(s.theta, *epsilon))),
    }
}

/// `N(x)` on the circle as an exact arc set.
pub fn neighborhood_arcs(field: &RadiusField, theta: f64) -> ArcSet {
    match field {
        RadiusField::Constant { alpha } => ArcSet::ball(theta, *alpha),
        RadiusField::Hubs { alpha, beta, .. } => {
            let hubs = hub_arcs(field);
            let wide = ArcSet::ball(theta, alpha + beta);
            if hubs.contains(theta) {
                wide
            } else {
                ArcSet::ball(theta, *alpha).union(&hubs.intersect(&wide))
            }
        }
    }
}

/// `mu(N(x))` with `mu` the uniform probability measure of the space.
///
/// Exact on the circle for any field. On the two-dimensional spaces only a
/// constant radius is supported: the disk uses the circle–circle
/// intersection area, the sphere the cap formula and the hyperbolic disk the
/// cap formula or, when the ball leaves the disk, quadrature.
pub fn neighborhood_volume(space: &LatentSpace, field: &RadiusField, x: &Point) -> Result<f64> {
    space.validate(x)?;
    if space.is_circle() {
        return Ok(neighborhood_arcs(field, x.theta).length() / TAU);
    }
    let alpha = match field {
        RadiusField::Constant { alpha } => *alpha,
        RadiusField::Hubs { .. } => {
            return Err(Error::Unsupported(
                "neighbourhood volumes with hubs are only available on the unit circle".into(),
            ))
        }
    };
    match *space {
        LatentSpace::UnitDisk => Ok(disk_lens_area(x.r, alpha) / PI),
        LatentSpace::Sphere => space.ball_measure_normalized(alpha),
        LatentSpace::HyperbolicDisk { radius } => {
            if x.r + alpha <= radius {
                space.ball_measure_normalized(alpha)
            } else {
                ball_probability(space, &AngularDensity::uniform(), x, alpha, BallMethod::Quadrature)
            }
        }
        LatentSpace::UnitCircle => unreachable!(),
    }
}

/// Area of the intersection of the unit disk with the disk of radius `a`
/// centred at distance `d` from the origin.
pub fn disk_lens_area(d: f64, a: f64) -> f64 {
    if a <= 0.0 {
        return 0.0;
    }
    if d + a <= 1.0 {
        return PI * a * a;
    }
    if a >= 1.0 + d {
        return PI;
    }
    let c1 = ((d * d + a * a - 1.0) / (2.0 * d * a)).clamp(-1.0, 1.0);
    let c2 = ((d * d + 1.0 - a * a) / (2.0 * d)).clamp(-1.0, 1.0);
    let k = ((-d + a + 1.0) * (d + a - 1.0) * (d - a + 1.0) * (d + a + 1.0)).max(0.0);
    a * a * c1.acos() + c2.acos() - 0.5 * k.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid_fraction(field: &RadiusField, theta: f64, samples: usize) -> f64 {
        let s = LatentSpace::UnitCircle;
        let x = Point::angle(theta);
        let ax = field.radius_at(&s, &x);
        let hits = (0..samples)
            .filter(|&k| {
                let y = Point::angle(-PI + TAU * (k as f64 + 0.5) / samples as f64);
                s.distance_unchecked(&x, &y) <= ax.max(field.radius_at(&s, &y))
            })
            .count();
        hits as f64 / samples as f64
    }

    #[test]
    fn arc_set_algebra() {
        let a = ArcSet::ball(3.0, 0.5);
        assert_eq!(a.arcs().len(), 2);
        assert!((a.length() - 1.0).abs() < 1e-14);
        assert!(a.contains(-3.0) && a.contains(3.1) && !a.contains(0.0));
        let b = ArcSet::ball(-3.0, 0.5);
        let u = a.union(&b);
        let lo = 3.0 - 0.5;
        let hi = -3.0 + 0.5;
        assert!((u.length() - ((PI - lo) + (hi + PI))).abs() < 1e-14);
        let i = a.intersect(&b);
        assert!((i.length() - (a.length() + b.length() - u.length())).abs() < 1e-14);
        assert_eq!(ArcSet::ball(0.0, 4.0), ArcSet::full());
        assert_eq!(ArcSet::ball(0.0, -1.0).length(), 0.0);
    }

    #[test]
    fn constant_volumes() {
        let f = RadiusField::constant(0.3);
        let v = neighborhood_volume(&LatentSpace::UnitCircle, &f, &Point::angle(1.0)).unwrap();
        assert!((v - 0.3 / PI).abs() < 1e-15);
        let s = LatentSpace::Sphere;
        let v = neighborhood_volume(&s, &f, &Point::polar(1.0, 0.0)).unwrap();
        assert!((v - 0.5 * (1.0 - 0.3f64.cos())).abs() < 1e-15);
    }

    #[test]
    fn disk_volumes_agree_with_quadrature() {
        let s = LatentSpace::UnitDisk;
        for (r, a) in [(0.5, 0.2), (0.9, 0.3), (1.0, 1.0), (0.2, 1.1), (0.0, 0.4), (0.95, 0.05)] {
            let f = RadiusField::constant(a);
            let x = Point::polar(r, 0.7);
            let closed = neighborhood_volume(&s, &f, &x).unwrap();
            let quad = ball_probability(&s, &AngularDensity::uniform(), &x, a, BallMethod::Quadrature).unwrap();
            assert!((closed - quad).abs() < 1e-9, "r={r} a={a}: {closed} vs {quad}");
        }
    }

    #[test]
    fn hyperbolic_volume_near_rim_is_below_cap_formula() {
        let s = LatentSpace::hyperbolic(6.0).unwrap();
        let f = RadiusField::constant(2.0);
        let inner = neighborhood_volume(&s, &f, &Point::polar(1.0, 0.0)).unwrap();
        assert!((inner - s.ball_measure_normalized(2.0).unwrap()).abs() < 1e-15);
        let rim = neighborhood_volume(&s, &f, &Point::polar(5.9, 0.0)).unwrap();
        assert!(rim < s.ball_measure_normalized(2.0).unwrap());
        assert!(rim > 0.0);
    }

    #[test]
    fn hubs_on_two_dimensional_spaces_are_unsupported() {
        let f = RadiusField::Hubs {
            alpha: 0.1,
            beta: 0.3,
            epsilon: 0.01,
            seeds: vec![Point::polar(0.2, 0.0)],
        };
        assert!(matches!(
            neighborhood_volume(&LatentSpace::UnitDisk, &f, &Point::polar(0.1, 0.0)),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn hub_volumes_match_grid_count() {
        let f = RadiusField::Hubs {
            alpha: 0.1,
            beta: 0.3,
            epsilon: 0.05,
            seeds: vec![Point::angle(0.0), Point::angle(3.1), Point::angle(0.5)],
        };
        for theta in [0.0, 0.02, 0.2, 0.3, -0.4, 2.9, -3.1, 1.5] {
            let exact = neighborhood_volume(&LatentSpace::UnitCircle, &f, &Point::angle(theta)).unwrap();
            let grid = grid_fraction(&f, theta, 400_000);
            assert!((exact - grid).abs() < 2e-5, "theta={theta}: {exact} vs {grid}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn arc_union_and_intersection_measures(c1 in -PI..PI, w1 in 0.0..3.5f64, c2 in -PI..PI, w2 in 0.0..3.5f64) {
            let a = ArcSet::ball(c1, w1);
            let b = ArcSet::ball(c2, w2);
            let u = a.union(&b);
            let i = a.intersect(&b);
            prop_assert!((u.length() + i.length() - a.length() - b.length()).abs() < 1e-12);
            for k in 0..50 {
                let t = -PI + TAU * (k as f64 + 0.37) / 50.0;
                prop_assert_eq!(u.contains(t), a.contains(t) || b.contains(t));
                prop_assert_eq!(i.contains(t), a.contains(t) && b.contains(t));
            }
        }

        #[test]
        fn neighbourhood_is_symmetric(x in -PI..PI, y in -PI..PI, s1 in -PI..PI) {
            let f = RadiusField::Hubs { alpha: 0.2, beta: 0.6, epsilon: 0.1, seeds: vec![Point::angle(s1)] };
            prop_assert_eq!(neighborhood_arcs(&f, x).contains(y), neighborhood_arcs(&f, y).contains(x));
        }
    }
}
