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

//! Angular sampling densities and the radial laws of the uniform measures.
//!
//! Non-uniformity is only ever introduced through the angle; the radial
//! coordinate of the two-dimensional spaces always follows the uniform law of
//! the space, so the Radon–Nikodym derivative of the sampling measure with
//! respect to the uniform probability measure is `2 pi f(theta)` everywhere.

mod ball;
mod sampling;

pub use ball::{
    ball_probability, expected_average_degree, expected_degree, mean_ball_probability, small_ball_error_bound,
    BallMethod,
};
pub use sampling::{envelope, sample_angles, sample_radii, ENVELOPE_GRID};

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::LatentSpace;
use crate::quadrature::Quadrature;
use crate::special::{bessel_i0_scaled, binomial};

const NONNEG_GRID: usize = 4096;

fn check_lengths(c: &[f64], n: &[u32], mu: &[f64]) -> Result<()> {
    if c.is_empty() || c.len() != n.len() || c.len() != mu.len() {
        return Err(invalid(format!(
            "c, n, mu must be non-empty and of equal length (got {}, {}, {})",
            c.len(),
            n.len(),
            mu.len()
        )));
    }
    if c.iter().chain(mu).any(|v| !v.is_finite()) {
        return Err(invalid("density parameters must be finite"));
    }
    Ok(())
}

fn grid_min<F: Fn(f64) -> f64>(f: F) -> f64 {
    (0..NONNEG_GRID)
        .map(|k| f(-PI + TAU * k as f64 / NONNEG_GRID as f64))
        .fold(f64::INFINITY, f64::min)
}

/// Finite cosine series density
/// `(sum_i c_i cos(n_i (theta - mu_i)) + A) / B`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrallyBounded {
    c: Vec<f64>,
    n: Vec<u32>,
    mu: Vec<f64>,
    offset: f64,
    norm: f64,
}

impl SpectrallyBounded {
    /// Standard construction: `A = sum |c_i|`, `B = 2 pi (A + sum_{n_i = 0} c_i)`.
    pub fn new(c: Vec<f64>, n: Vec<u32>, mu: Vec<f64>) -> Result<Self> {
        check_lengths(&c, &n, &mu)?;
        let offset = c.iter().map(|v| v.abs()).sum();
        Self::build(c, n, mu, offset)
    }

    /// Same cosine series with an explicit offset `A`. The series must stay
    /// non-negative; `B` is chosen so the density integrates to one.
    pub fn with_offset(c: Vec<f64>, n: Vec<u32>, mu: Vec<f64>, offset: f64) -> Result<Self> {
        check_lengths(&c, &n, &mu)?;
        if !offset.is_finite() {
            return Err(invalid("offset must be finite"));
        }
        let d = Self::build(c, n, mu, offset)?;
        let min = grid_min(|t| d.eval(t));
        if min < -1e-12 {
            return Err(Error::DegenerateDensity(format!(
                "cosine series with offset {offset} is negative (min {min:.3e})"
            )));
        }
        Ok(d)
    }

    fn build(c: Vec<f64>, n: Vec<u32>, mu: Vec<f64>, offset: f64) -> Result<Self> {
        let constant: f64 = c.iter().zip(&n).filter(|(_, &k)| k == 0).map(|(v, _)| v).sum();
        let norm = TAU * (offset + constant);
        if !(norm.abs() > 1e-300) {
            return Err(invalid("normalization constant B vanishes"));
        }
        if norm < 0.0 {
            return Err(invalid("normalization constant B is negative"));
        }
        Ok(Self { c, n, mu, offset, norm })
    }

    pub fn uniform() -> Self {
        Self::new(vec![1.0], vec![0], vec![0.0]).expect("uniform parameters are valid")
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }
    pub fn n(&self) -> &[u32] {
        &self.n
    }
    pub fn mu(&self) -> &[f64] {
        &self.mu
    }
    /// The offset `A`.
    pub fn offset(&self) -> f64 {
        self.offset
    }
    /// The normalization `B`.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// `sum_{n_i = 0} c_i + A`, the constant part of the numerator.
    pub fn constant_part(&self) -> f64 {
        self.offset + self.terms().filter(|&(_, n, _)| n == 0).map(|(c, _, _)| c).sum::<f64>()
    }

    pub fn terms(&self) -> impl Iterator<Item = (f64, u32, f64)> + '_ {
        self.c
            .iter()
            .zip(&self.n)
            .zip(&self.mu)
            .map(|((&c, &n), &mu)| (c, n, mu))
    }

    /// Oscillating terms only (`n_i >= 1`).
    pub fn harmonics(&self) -> impl Iterator<Item = (f64, u32, f64)> + '_ {
        self.terms().filter(|&(_, n, _)| n > 0)
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let s: f64 = self
            .terms()
            .map(|(c, n, mu)| c * (f64::from(n) * (theta - mu)).cos())
            .sum();
        (s + self.offset) / self.norm
    }

    /// Exact mass of the arc `[center - half_width, center + half_width]`.
    pub fn arc_mass(&self, center: f64, half_width: f64) -> f64 {
        if half_width <= 0.0 {
            return 0.0;
        }
        if half_width >= PI {
            return 1.0;
        }
        let osc: f64 = self
            .harmonics()
            .map(|(c, n, mu)| {
                let k = f64::from(n);
                2.0 * c / k * (k * (center - mu)).cos() * (k * half_width).sin()
            })
            .sum();
        (osc + 2.0 * self.constant_part() * half_width) / self.norm
    }
}

/// Mixture-like density of von Mises kernels `exp(kappa cos(n (theta - mu)))`.
///
/// Terms with negative weight are lifted by an offset so the density stays
/// non-negative; with all `c_i >= 0` the offset is zero and the density is a
/// plain normalized mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct MultimodalVonMises {
    c: Vec<f64>,
    n: Vec<u32>,
    mu: Vec<f64>,
    kappa: Vec<f64>,
    offset: f64,
    norm: f64,
    i0_scaled: Vec<f64>,
}

impl MultimodalVonMises {
    pub fn new(c: Vec<f64>, n: Vec<u32>, mu: Vec<f64>, kappa: Vec<f64>) -> Result<Self> {
        check_lengths(&c, &n, &mu)?;
        if kappa.len() != c.len() {
            return Err(invalid("kappa must have the same length as c"));
        }
        if kappa.iter().any(|k| !(k.is_finite() && *k >= 0.0)) {
            return Err(invalid("kappa entries must be finite and non-negative"));
        }
        let i0_scaled: Vec<f64> = kappa.iter().map(|&k| bessel_i0_scaled(k)).collect();
        // max of exp(k cos)/(2 pi I0(k)) is 1/(2 pi e^{-k} I0(k))
        let offset: f64 = c
            .iter()
            .zip(&i0_scaled)
            .filter(|(c, _)| **c < 0.0)
            .map(|(c, s)| -c / (TAU * s))
            .sum();
        let mut norm = TAU * offset;
        for ((&ci, &ni), s) in c.iter().zip(&n).zip(&i0_scaled) {
            norm += if ni >= 1 { ci } else { ci / s };
        }
        if !(norm > 1e-300) {
            return Err(invalid("multimodal von Mises normalization is not positive"));
        }
        Ok(Self {
            c,
            n,
            mu,
            kappa,
            offset,
            norm,
            i0_scaled,
        })
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }
    pub fn n(&self) -> &[u32] {
        &self.n
    }
    pub fn mu(&self) -> &[f64] {
        &self.mu
    }
    pub fn kappa(&self) -> &[f64] {
        &self.kappa
    }
    pub fn offset(&self) -> f64 {
        self.offset
    }
    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let mut s = self.offset;
        for i in 0..self.c.len() {
            let k = self.kappa[i];
            let cosv = (f64::from(self.n[i]) * (theta - self.mu[i])).cos();
            s += self.c[i] * (k * (cosv - 1.0)).exp() / (TAU * self.i0_scaled[i]);
        }
        s / self.norm
    }
}

/// Cosine-series approximation of a multimodal von Mises density, built from
/// the truncated Taylor series of each `exp(kappa cos x)`:
///
/// * `kappa <= 1`: `1 + (cosh k - 1) cos^2 x + sinh k cos x`;
/// * otherwise, with `k` rounded to an integer: the two dominant Taylor powers,
///   `cos^k` / `cos^(k-1)` weighted by `cosh k - 1` and `sinh k` (even `k`
///   puts the `cosh` weight on `cos^k`, odd `k` on `cos^(k-1)`).
///
/// Powers of cosine are expanded into harmonics with the binomial identity.
/// The result is lifted when necessary so it stays non-negative, then
/// normalized.
pub fn mvm_to_sbrv(d: &MultimodalVonMises) -> SpectrallyBounded {
    // harmonic (n, mu bits) -> coefficient, ordered for reproducibility
    let mut harmonics: BTreeMap<(u32, u64), f64> = BTreeMap::new();
    let mut constant = d.offset;
    for i in 0..d.c.len() {
        let (c, n, mu, kappa, s) = (d.c[i], d.n[i], d.mu[i], d.kappa[i], d.i0_scaled[i]);
        if n == 0 {
            constant += c / (TAU * s);
            continue;
        }
        // c/(2 pi I0(k)) times each Taylor coefficient, in overflow-free form
        let e = (-kappa).exp();
        let unit = c * e / (TAU * s);
        let cosh_m1 = c * (0.5 * (1.0 + e * e) - e) / (TAU * s);
        let sinh = c * 0.5 * (1.0 - e * e) / (TAU * s);
        let (p_cosh, p_sinh) = if kappa <= 1.0 {
            (2, 1)
        } else {
            let k = kappa.round() as u32;
            if k.is_multiple_of(2) {
                (k, k - 1)
            } else {
                (k - 1, k)
            }
        };
        constant += unit;
        for (weight, power) in [(cosh_m1, p_cosh), (sinh, p_sinh)] {
            let scale = weight / 2f64.powi(power as i32);
            for j in 0..=power {
                let m = (2 * j as i64 - power as i64).unsigned_abs() as u32;
                let coef = scale * binomial(power, j);
                if m == 0 {
                    constant += coef;
                } else {
                    *harmonics.entry((m * n, mu.to_bits())).or_insert(0.0) += coef;
                }
            }
        }
    }
    let (mut c, mut n, mut mu) = (Vec::new(), Vec::new(), Vec::new());
    for ((k, mu_bits), coef) in harmonics {
        c.push(coef);
        n.push(k);
        mu.push(f64::from_bits(mu_bits));
    }
    if c.is_empty() {
        c.push(0.0);
        n.push(1);
        mu.push(0.0);
    }
    let provisional = SpectrallyBounded::build(c.clone(), n.clone(), mu.clone(), constant)
        .expect("approximation has a positive constant term");
    let lift = (-grid_min(|t| provisional.eval(t) * provisional.norm)).max(0.0);
    SpectrallyBounded::build(c, n, mu, constant + lift).expect("lifted series is normalizable")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DensitySpec", into = "DensitySpec")]
pub enum AngularDensity {
    Sbrv(SpectrallyBounded),
    Mvm(MultimodalVonMises),
}

impl From<SpectrallyBounded> for AngularDensity {
    fn from(d: SpectrallyBounded) -> Self {
        Self::Sbrv(d)
    }
}

impl From<MultimodalVonMises> for AngularDensity {
    fn from(d: MultimodalVonMises) -> Self {
        Self::Mvm(d)
    }
}

impl AngularDensity {
    pub fn uniform() -> Self {
        Self::Sbrv(SpectrallyBounded::uniform())
    }

    pub fn eval(&self, theta: f64) -> f64 {
        match self {
            Self::Sbrv(d) => d.eval(theta),
            Self::Mvm(d) => d.eval(theta),
        }
    }

    pub fn as_sbrv(&self) -> Option<&SpectrallyBounded> {
        match self {
            Self::Sbrv(d) => Some(d),
            Self::Mvm(_) => None,
        }
    }

    pub fn is_uniform(&self) -> bool {
        match self {
            Self::Sbrv(d) => d.harmonics().all(|(c, _, _)| c == 0.0),
            Self::Mvm(d) => {
                d.c.iter()
                    .zip(&d.n)
                    .zip(&d.kappa)
                    .all(|((&c, &n), &k)| c == 0.0 || n == 0 || k == 0.0)
            }
        }
    }

    /// Mass of an arc: exact for spectrally bounded densities, adaptive
    /// quadrature otherwise.
    pub fn arc_mass(&self, center: f64, half_width: f64) -> f64 {
        match self {
            Self::Sbrv(d) => d.arc_mass(center, half_width),
            Self::Mvm(_) => self.arc_mass_numeric(center, half_width, 1e-13),
        }
    }

    /// Mass of an arc by adaptive quadrature, whatever the family.
    pub fn arc_mass_numeric(&self, center: f64, half_width: f64, abs_tol: f64) -> f64 {
        if half_width <= 0.0 {
            return 0.0;
        }
        let w = half_width.min(PI);
        Quadrature::with_tol(abs_tol)
            .integrate(|t| self.eval(t), center - w, center + w)
            .value
    }

    /// Radon–Nikodym derivative w.r.t. the uniform probability on the angle.
    pub fn rho(&self, theta: f64) -> f64 {
        TAU * self.eval(theta)
    }

    /// Parses `uniform` or a JSON object `{type, c, n, mu, kappa?}`.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if t.eq_ignore_ascii_case("uniform") {
            return Ok(Self::uniform());
        }
        Ok(serde_json::from_str(t)?)
    }
}

/// Serialized form of a density: `{type, c[], n[], mu[], kappa[]?}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensitySpec {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default)]
    pub c: Vec<f64>,
    #[serde(default)]
    pub n: Vec<u32>,
    #[serde(default)]
    pub mu: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<Vec<f64>>,
    /// Explicit offset; absent means the standard `A = sum |c_i|`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<f64>,
}

impl TryFrom<DensitySpec> for AngularDensity {
    type Error = Error;

    fn try_from(s: DensitySpec) -> Result<Self> {
        match s.kind.as_str() {
            "uniform" => Ok(Self::uniform()),
            "sbrv" => Ok(Self::Sbrv(match s.offset {
                Some(a) => SpectrallyBounded::with_offset(s.c, s.n, s.mu, a)?,
                None => SpectrallyBounded::new(s.c, s.n, s.mu)?,
            })),
            "mvm" => {
                let kappa = s.kappa.ok_or_else(|| invalid("mvm density needs kappa"))?;
                Ok(Self::Mvm(MultimodalVonMises::new(s.c, s.n, s.mu, kappa)?))
            }
            other => Err(invalid(format!("unknown density type `{other}`"))),
        }
    }
}

impl From<AngularDensity> for DensitySpec {
    fn from(d: AngularDensity) -> Self {
        match d {
            AngularDensity::Sbrv(s) => {
                let standard: f64 = s.c.iter().map(|v| v.abs()).sum();
                let offset = (s.offset != standard).then_some(s.offset);
                DensitySpec {
                    kind: "sbrv".into(),
                    c: s.c,
                    n: s.n,
                    mu: s.mu,
                    kappa: None,
                    offset,
                }
            }
            AngularDensity::Mvm(m) => DensitySpec {
                kind: "mvm".into(),
                c: m.c,
                n: m.n,
                mu: m.mu,
                kappa: Some(m.kappa),
                offset: None,
            },
        }
    }
}

/// Radial factor of the uniform probability density of a two-dimensional
/// space (disk: `2r/R^2`; sphere: `sin(phi)/2`; hyperbolic: `sinh r / (cosh R - 1)`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialLaw {
    space: LatentSpace,
}

impl RadialLaw {
    pub fn new(space: LatentSpace) -> Result<Self> {
        if space.is_circle() {
            return Err(Error::Unsupported("the unit circle has no radial coordinate".into()));
        }
        Ok(Self { space })
    }

    pub fn space(&self) -> LatentSpace {
        self.space
    }

    pub fn extent(&self) -> f64 {
        self.space.radial_extent().expect("two-dimensional space")
    }

    pub fn pdf(&self, r: f64) -> f64 {
        let extent = self.extent();
        if !(0.0..=extent).contains(&r) {
            return 0.0;
        }
        match self.space {
            LatentSpace::UnitDisk => 2.0 * r / (extent * extent),
            LatentSpace::Sphere => 0.5 * r.sin(),
            LatentSpace::HyperbolicDisk { radius } => r.sinh() / (radius.cosh() - 1.0),
            LatentSpace::UnitCircle => unreachable!(),
        }
    }

    pub fn cdf(&self, r: f64) -> f64 {
        let extent = self.extent();
        let r = r.clamp(0.0, extent);
        match self.space {
            LatentSpace::UnitDisk => (r / extent).powi(2),
            LatentSpace::Sphere => 0.5 * (1.0 - r.cos()),
            LatentSpace::HyperbolicDisk { radius } => (r.cosh() - 1.0) / (radius.cosh() - 1.0),
            LatentSpace::UnitCircle => unreachable!(),
        }
    }

    /// Inverse CDF at `u` in `[0, 1]`.
    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        match self.space {
            LatentSpace::UnitDisk => self.extent() * u.sqrt(),
            LatentSpace::Sphere => (1.0 - 2.0 * u).clamp(-1.0, 1.0).acos(),
            LatentSpace::HyperbolicDisk { radius } => {
                // arccosh(1 + x) for x = u (cosh R - 1)
                let x = u * (radius.cosh() - 1.0);
                (x + (x * (x + 2.0)).sqrt()).ln_1p().min(radius)
            }
            LatentSpace::UnitCircle => unreachable!(),
        }
    }
}
