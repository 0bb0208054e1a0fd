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

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{AngularDensity, RadialLaw, SpectrallyBounded};
use crate::error::{domain, Error, Result};
use crate::geometry::{LatentSpace, Point};
use crate::quadrature::Quadrature;
use crate::special::chebyshev_u;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BallMethod {
    ClosedForm,
    Quadrature,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha >= 0.0 && !alpha.is_nan() {
        Ok(())
    } else {
        Err(domain(format!("ball radius must be non-negative, got {alpha}")))
    }
}

fn need_sbrv<'a>(density: &'a AngularDensity, what: &str) -> Result<&'a SpectrallyBounded> {
    density.as_sbrv().ok_or_else(|| {
        Error::Unsupported(format!(
            "{what} has no closed form for a von Mises density; convert it with mvm_to_sbrv or use quadrature"
        ))
    })
}

/// Probability under the sampling measure of the closed ball of radius
/// `alpha` about `center`.
pub fn ball_probability(
    space: &LatentSpace,
    density: &AngularDensity,
    center: &Point,
    alpha: f64,
    method: BallMethod,
) -> Result<f64> {
    check_alpha(alpha)?;
    space.validate(center)?;
    match method {
        BallMethod::Quadrature => Ok(quadrature_ball(space, density, center, alpha)),
        BallMethod::ClosedForm => {
            let d = need_sbrv(density, "the ball probability")?;
            match space {
                LatentSpace::UnitCircle => Ok(d.arc_mass(center.theta, alpha)),
                LatentSpace::UnitDisk => Ok(disk_ellipse(d, center, alpha)),
                LatentSpace::HyperbolicDisk { radius } => {
                    let p = 8.0 * (0.5 * (alpha - radius - center.r)).exp() * d.eval(center.theta);
                    Ok(p.min(1.0))
                }
                LatentSpace::Sphere => Err(Error::Unsupported(
                    "no closed-form ball probability on the sphere; use quadrature".into(),
                )),
            }
        }
    }
}

/// `n * ball_probability`; `n` is the number of other nodes a node can reach.
pub fn expected_degree(
    space: &LatentSpace,
    density: &AngularDensity,
    center: &Point,
    alpha: f64,
    n: f64,
    method: BallMethod,
) -> Result<f64> {
    Ok(n * ball_probability(space, density, center, alpha, method)?)
}

/// Closed-form expected average degree of `n` nodes.
///
/// The disk and hyperbolic formulas are leading-order approximations: the
/// disk expression ignores the boundary of the disk entirely.
pub fn expected_average_degree(space: &LatentSpace, density: &AngularDensity, alpha: f64, n: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let d = need_sbrv(density, "the expected average degree")?;
    let k = d.constant_part();
    let b = d.norm();
    let pairs = |weight: &dyn Fn(u32) -> f64| -> f64 {
        let mut s = 0.0;
        for (ci, ni, mi) in d.harmonics() {
            for (cj, nj, mj) in d.harmonics() {
                if ni == nj {
                    s += ci * cj * (f64::from(ni) * (mi - mj)).cos() * weight(ni);
                }
            }
        }
        s
    };
    match *space {
        LatentSpace::UnitCircle => {
            let a = alpha.min(PI);
            if a == 0.0 {
                return Ok(0.0);
            }
            let osc = pairs(&|m| {
                let x = f64::from(m) * a;
                x.sin() / x
            });
            Ok(2.0 * PI * n * a / (b * b) * (osc + 2.0 * k * k))
        }
        LatentSpace::UnitDisk => Ok(2.0 * PI * PI * alpha * alpha * n / (b * b) * (pairs(&|_| 1.0) + 2.0 * k * k)),
        LatentSpace::HyperbolicDisk { radius } => {
            Ok(16.0 * PI * n * (0.5 * (alpha - 2.0 * radius)).exp() / (b * b) * (pairs(&|_| 1.0) + 2.0 * k * k))
        }
        LatentSpace::Sphere => Err(Error::Unsupported(
            "no closed-form expected average degree on the sphere".into(),
        )),
    }
}

/// Average of `ball_probability` over a node drawn from the sampling
/// measure, by nested quadrature. With `ClosedForm` the inner probability is
/// the closed form (boundary corrections included), so the result is the
/// exact mean of the approximation rather than its leading-order formula.
pub fn mean_ball_probability(
    space: &LatentSpace,
    density: &AngularDensity,
    alpha: f64,
    method: BallMethod,
) -> Result<f64> {
    check_alpha(alpha)?;
    if method == BallMethod::ClosedForm {
        need_sbrv(density, "the ball probability")?;
        if matches!(space, LatentSpace::Sphere) {
            return Err(Error::Unsupported(
                "no closed-form ball probability on the sphere; use quadrature".into(),
            ));
        }
    }
    let p = |r: f64, theta: f64| {
        let c = Point {
            theta: crate::geometry::wrap_angle(theta),
            r,
        };
        ball_probability(space, density, &c, alpha, method).expect("validated inputs")
    };
    let quad = Quadrature {
        abs_tol: 1e-9,
        rel_tol: 1e-8,
        max_intervals: 400,
    };
    let angular = |r: f64| quad.integrate(|t| density.eval(t) * p(r, t), -PI, PI).value;
    if space.is_circle() {
        return Ok(angular(0.0));
    }
    let law = RadialLaw::new(*space)?;
    let extent = law.extent();
    let mut breaks = vec![0.0, alpha, extent - alpha, extent];
    breaks.retain(|x| (0.0..=extent).contains(x));
    breaks.sort_by(f64::total_cmp);
    Ok(quad.integrate_breaks(|r| law.pdf(r) * angular(r), &breaks).value)
}

/// Bound on `|f(theta) - P[ball_alpha(theta)] / (2 alpha)|` on the circle,
/// `sum_i n_i^2 |c_i| alpha^2 / (6 B)`.
pub fn small_ball_error_bound(d: &SpectrallyBounded, alpha: f64) -> f64 {
    let s: f64 = d.harmonics().map(|(c, n, _)| f64::from(n * n) * c.abs()).sum();
    s * alpha * alpha / (6.0 * d.norm())
}

fn quadrature_ball(space: &LatentSpace, density: &AngularDensity, center: &Point, alpha: f64) -> f64 {
    if space.is_circle() {
        if alpha >= PI {
            return 1.0;
        }
        return density.arc_mass_numeric(center.theta, alpha, 1e-14);
    }
    let law = RadialLaw::new(*space).expect("two-dimensional space");
    let extent = law.extent();
    let rc = center.r;
    let mut breaks = vec![0.0, (rc - alpha).abs(), rc + alpha, 2.0 * PI - rc - alpha, extent];
    if matches!(space, LatentSpace::Sphere) {
        breaks.push(alpha - rc);
    }
    breaks.retain(|x| (0.0..=extent).contains(x));
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let quad = Quadrature {
        abs_tol: 1e-13,
        rel_tol: 1e-11,
        max_intervals: 2000,
    };
    let integrand = |r: f64| {
        let w = space.ring_half_angle(r, center, alpha);
        if w < 0.0 {
            0.0
        } else {
            law.pdf(r) * density.arc_mass(center.theta, w)
        }
    };
    quad.integrate_breaks(integrand, &breaks).value.clamp(0.0, 1.0)
}

/// Ellipse approximation of the disk ball probability.
///
/// Each radial integral `int r sin(n theta_r(r)) dr` is replaced by the
/// semi-area of an ellipse with semi-axes `min(alpha, r_c)` and the integrand
/// value at `max(alpha, r_c)`, minus the elliptic segment beyond `r = 1` when
/// the ball crosses the boundary. The disk of radius `alpha - r_c` around the
/// origin contributes its exact mass.
fn disk_ellipse(d: &SpectrallyBounded, center: &Point, alpha: f64) -> f64 {
    let rc = center.r;
    if alpha == 0.0 {
        return 0.0;
    }
    if alpha >= 1.0 + rc {
        return 1.0;
    }
    if rc == 0.0 {
        // ball about the origin: exact
        return alpha.min(1.0).powi(2);
    }
    let cos_window = |r: f64| ((r * r + rc * rc - alpha * alpha) / (2.0 * r * rc)).clamp(-1.0, 1.0);
    let semi_axis = alpha.min(rc);
    let peak = alpha.max(rc);
    let s = 1.0 - rc;
    let segment = if rc + alpha > 1.0 {
        let q = s / alpha;
        0.5 * (alpha * q.acos() - q * (alpha * alpha - s * s).max(0.0).sqrt())
    } else {
        0.0
    };
    let ellipse = |h: &dyn Fn(f64) -> f64| 0.5 * PI * semi_axis * h(peak) - segment * h(rc);

    let k = d.constant_part();
    let g = |r: f64| r * cos_window(r).acos();
    let mut p = 4.0 / d.norm() * k * ellipse(&g);
    for (c, n, mu) in d.harmonics() {
        let f = |r: f64| {
            let x = cos_window(r);
            r * (1.0 - x * x).max(0.0).sqrt() * chebyshev_u(n - 1, x)
        };
        let nf = f64::from(n);
        p += 4.0 / d.norm() * c / nf * (nf * (center.theta - mu)).cos() * ellipse(&f);
    }
    p += (alpha - rc).max(0.0).powi(2);
    p.clamp(0.0, 1.0)
}
