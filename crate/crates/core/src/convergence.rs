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

//! Monte-Carlo comparison of sampled shift operators with their continuous
//! limit.
//!
//! For a node at `x` the continuous operator is
//!
//! ```text
//! (Lu)(x) = m1(mu(N(x))) int_{N(x)} m2(mu(N(y))) u(y) dmu(y)
//!         - m3(mu(N(x))) u(x) int_{N(x)} m4(mu(N(y))) dmu(y)
//! ```
//!
//! with `mu` the uniform probability measure of the space. Each trial
//! samples a graph, builds the operator at the requested density weights and
//! compares both sides at a fixed set of probe nodes.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::density::{AngularDensity, RadialLaw};
use crate::error::{invalid, Error, Result};
use crate::estimate::{estimate_density, true_volumes};
use crate::geometry::{LatentSpace, Point};
use crate::graphgen::{generate, Alpha, GeometricGraph, HubConfig};
use crate::gso::{GsoSpec, Modulation, SparseGso};
use crate::neighborhood::{hub_arcs, neighborhood_arcs, neighborhood_volume, RadiusField};
use crate::quadrature::Quadrature;
use crate::stats::{derive_seed, linear_fit, mean, median, spearman};

/// Default number of probe nodes per trial.
pub const DEFAULT_PROBES: usize = 64;

/// Bounded closed-form signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestSignal {
    Constant(f64),
    /// `cos(k theta)`.
    CosHarmonic(u32),
    /// `r^k`; identically `0^k` on the circle.
    RadialPoly(u32),
}

impl TestSignal {
    pub fn eval(&self, p: &Point) -> f64 {
        match *self {
            Self::Constant(k) => k,
            Self::CosHarmonic(k) => (k as f64 * p.theta).cos(),
            Self::RadialPoly(k) => p.r.powi(k as i32),
        }
    }

    /// `int u(r, theta) dtheta` over `[center - w, center + w]` on the ring
    /// of radius `r`, for `0 <= w <= pi`.
    fn ring_integral(&self, r: f64, center: f64, w: f64) -> f64 {
        match *self {
            Self::Constant(k) => 2.0 * w * k,
            Self::CosHarmonic(0) => 2.0 * w,
            Self::CosHarmonic(k) => {
                if w >= PI {
                    return 0.0;
                }
                let k = k as f64;
                2.0 * (k * center).cos() * (k * w).sin() / k
            }
            Self::RadialPoly(k) => 2.0 * w * r.powi(k as i32),
        }
    }
}

impl fmt::Display for TestSignal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(k) => write!(f, "constant:{k}"),
            Self::CosHarmonic(k) => write!(f, "cos:{k}"),
            Self::RadialPoly(k) => write!(f, "radial:{k}"),
        }
    }
}

impl FromStr for TestSignal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            invalid(format!(
                "unknown signal `{s}` (expected constant:<k>, cos:<k> or radial:<k>)"
            ))
        };
        let (kind, arg) = s.trim().split_once(':').ok_or_else(bad)?;
        match kind {
            "constant" => arg.parse().map(Self::Constant).map_err(|_| bad()),
            "cos" => arg.parse().map(Self::CosHarmonic).map_err(|_| bad()),
            "radial" => arg.parse().map(Self::RadialPoly).map_err(|_| bad()),
            _ => Err(bad()),
        }
    }
}

impl Serialize for TestSignal {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TestSignal {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

fn quad() -> Quadrature {
    Quadrature {
        abs_tol: 1e-13,
        rel_tol: 1e-11,
        max_intervals: 4000,
    }
}

/// `(Lu)(x)` of the continuous model.
///
/// On the circle any radius field is supported and the integrals are split
/// at every point where `mu(N(y))` can change slope. On the two-dimensional
/// spaces the radius must be constant; the angular integral is exact and the
/// radial one numerical.
pub fn continuous_apply(
    space: &LatentSpace,
    field: &RadiusField,
    spec: &GsoSpec,
    u: &TestSignal,
    x: &Point,
) -> Result<f64> {
    space.validate(x)?;
    let (vol_x, first, second) = if space.is_circle() {
        circle_integrals(field, spec, u, x)
    } else {
        let RadiusField::Constant { alpha } = *field else {
            return Err(Error::Unsupported(
                "the continuous model with hubs is only available on the unit circle".into(),
            ));
        };
        planar_integrals(space, alpha, spec, u, x)?
    };
    Ok(spec.m1.apply(vol_x) * first - spec.m3.apply(vol_x) * u.eval(x) * second)
}

fn skip(m: &Modulation) -> bool {
    matches!(m, Modulation::Zero)
}

fn circle_integrals(field: &RadiusField, spec: &GsoSpec, u: &TestSignal, x: &Point) -> (f64, f64, f64) {
    let nx = neighborhood_arcs(field, x.theta);
    let vol_x = nx.length() / TAU;
    let vol = |t: f64| neighborhood_arcs(field, t).length() / TAU;
    let q = quad();
    let integrate = |m: &Modulation, with_u: bool| -> f64 {
        let mut total = 0.0;
        for &(a, b) in nx.arcs() {
            let mut pts = vec![a, b];
            if let RadiusField::Hubs { alpha, beta, .. } = field {
                // mu(N(y)) is piecewise linear in y with kinks where y enters
                // or leaves a hub, or sits alpha or alpha + beta from one
                for e in hub_arcs(field).endpoints() {
                    for off in [0.0, *alpha, alpha + beta] {
                        for s in [e - off, e + off, e - off + TAU, e + off - TAU] {
                            if a < s && s < b {
                                pts.push(s);
                            }
                        }
                    }
                }
            }
            pts.sort_by(f64::total_cmp);
            pts.dedup();
            let value = q
                .integrate_breaks(
                    |t| {
                        let w = m.apply(vol(t));
                        if with_u {
                            w * u.eval(&Point::angle(t))
                        } else {
                            w
                        }
                    },
                    &pts,
                )
                .value;
            total += value / TAU;
        }
        total
    };
    let first = if skip(&spec.m1) { 0.0 } else { integrate(&spec.m2, true) };
    let second = if skip(&spec.m3) {
        0.0
    } else {
        integrate(&spec.m4, false)
    };
    (vol_x, first, second)
}

fn planar_integrals(
    space: &LatentSpace,
    alpha: f64,
    spec: &GsoSpec,
    u: &TestSignal,
    x: &Point,
) -> Result<(f64, f64, f64)> {
    let field = RadiusField::constant(alpha);
    let law = RadialLaw::new(*space)?;
    let extent = law.extent();
    let vol_x = neighborhood_volume(space, &field, x)?;
    let rc = x.r;
    let mut breaks = vec![
        0.0,
        (rc - alpha).abs(),
        rc + alpha,
        TAU - rc - alpha,
        extent - alpha,
        extent,
    ];
    if matches!(space, LatentSpace::Sphere) {
        breaks.extend([alpha - rc, PI - alpha]);
    }
    breaks.retain(|b| (0.0..=extent).contains(b));
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    // mu(N(y)) depends on |y| only
    let vol = |r: f64| neighborhood_volume(space, &field, &Point::polar(r, 0.0));
    let q = quad();
    let integrate = |m: &Modulation, with_u: bool| -> Result<f64> {
        let failure = std::cell::RefCell::new(None);
        let value = q
            .integrate_breaks(
                |r| {
                    let w = space.ring_half_angle(r, x, alpha);
                    if w < 0.0 {
                        return 0.0;
                    }
                    let v = match vol(r) {
                        Ok(v) => v,
                        Err(e) => {
                            failure.borrow_mut().get_or_insert(e);
                            return 0.0;
                        }
                    };
                    let ring = if with_u {
                        u.ring_integral(r, x.theta, w)
                    } else {
                        2.0 * w
                    };
                    law.pdf(r) * m.apply(v) * ring / TAU
                },
                &breaks,
            )
            .value;
        failure.into_inner().map_or(Ok(value), Err)
    };
    let first = if skip(&spec.m1) {
        0.0
    } else {
        integrate(&spec.m2, true)?
    };
    let second = if skip(&spec.m3) {
        0.0
    } else {
        integrate(&spec.m4, false)?
    };
    Ok((vol_x, first, second))
}

/// Density weights used when building the sampled operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhoMode {
    /// The generating density.
    #[default]
    True,
    /// All ones, as if the nodes were uniform.
    Ignore,
    /// Degree over exact neighbourhood volume where available, degree only
    /// otherwise.
    Estimate,
}

impl FromStr for RhoMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "true" => Ok(Self::True),
            "ignore" => Ok(Self::Ignore),
            "estimate" => Ok(Self::Estimate),
            other => Err(invalid(format!(
                "unknown rho mode `{other}` (expected true, ignore or estimate)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceConfig {
    pub space: LatentSpace,
    pub density: AngularDensity,
    pub n_grid: Vec<usize>,
    pub trials: usize,
    pub alpha: Alpha,
    #[serde(default)]
    pub hubs: usize,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub epsilon: Option<f64>,
    pub spec: GsoSpec,
    pub signal: TestSignal,
    /// Failure probability of the sup-error bound.
    pub p: f64,
    #[serde(default)]
    pub rho: RhoMode,
    pub seed: u64,
    pub probes: usize,
}

impl ConvergenceConfig {
    /// Circle, uniform density, random-walk operator, `u = cos theta`.
    pub fn circle(spec: GsoSpec, alpha: f64, n_grid: Vec<usize>, trials: usize, seed: u64) -> Self {
        Self {
            space: LatentSpace::UnitCircle,
            density: AngularDensity::uniform(),
            n_grid,
            trials,
            alpha: Alpha::Fixed(alpha),
            hubs: 0,
            beta: None,
            epsilon: None,
            spec,
            signal: TestSignal::CosHarmonic(1),
            p: 0.05,
            rho: RhoMode::True,
            seed,
            probes: DEFAULT_PROBES,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() || self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("the N grid must be non-empty and strictly increasing"));
        }
        if self.trials < 5 {
            return Err(invalid(format!("at least 5 trials are required, got {}", self.trials)));
        }
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(invalid(format!("p must lie in (0, 1), got {}", self.p)));
        }
        if self.probes == 0 {
            return Err(invalid("at least one probe node is required"));
        }
        Ok(())
    }

    fn hub_config(&self, n: usize, seed: u64) -> HubConfig {
        HubConfig {
            n,
            hubs: self.hubs,
            alpha: self.alpha,
            beta: self.beta,
            epsilon: self.epsilon,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub n: usize,
    pub trial: usize,
    /// Mean squared error over the probes.
    pub mse: f64,
    /// Largest absolute error over the probes.
    pub sup_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub config: ConvergenceConfig,
    pub n_grid: Vec<usize>,
    /// Mean over trials of the per-trial MSE.
    pub mse: Vec<f64>,
    /// Median over trials of the per-trial sup error.
    pub sup_err: Vec<f64>,
    /// `sup_err / sqrt((ln(1/p) + ln N) / N)`.
    pub sup_ratio: Vec<f64>,
    pub trials: usize,
    /// Least-squares slope of `ln mse` against `ln N`.
    pub fitted_slope: f64,
    pub fitted_intercept: f64,
    pub results: Vec<TrialResult>,
}

impl ConvergenceReport {
    /// Rows `N,trial,mse,sup_err`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,trial,mse,sup_err\n");
        for r in &self.results {
            writeln!(out, "{},{},{:e},{:e}", r.n, r.trial, r.mse, r.sup_err).expect("writing to a String");
        }
        out
    }

    /// Rank correlation of the normalized sup error with `N`.
    pub fn sup_ratio_trend(&self) -> f64 {
        let n: Vec<f64> = self.n_grid.iter().map(|&n| n as f64).collect();
        spearman(&self.sup_ratio, &n)
    }
}

/// Density weights seen by the sampled operator.
pub fn operator_rho(g: &GeometricGraph, mode: RhoMode) -> Result<Vec<f64>> {
    Ok(match mode {
        RhoMode::True => g.rho_true.clone(),
        RhoMode::Ignore => vec![1.0; g.n()],
        RhoMode::Estimate => {
            let volumes = true_volumes(g).ok();
            estimate_density(g, volumes.as_deref())?.filled(1.0)
        }
    })
}

/// Per-probe pairs `(sampled, continuous)` for one graph.
pub fn probe_values(g: &GeometricGraph, cfg: &ConvergenceConfig) -> Result<Vec<(f64, f64)>> {
    let rho = operator_rho(g, cfg.rho)?;
    let op = SparseGso::build(g.n(), &g.edges, &rho, &cfg.spec)?;
    let u: Vec<f64> = g.positions.iter().map(|p| cfg.signal.eval(p)).collect();
    let field = RadiusField::from_graph(g);
    (0..cfg.probes.min(g.n()))
        .map(|i| {
            let cont = continuous_apply(&g.space, &field, &cfg.spec, &cfg.signal, &g.positions[i])?;
            Ok((op.apply_row(i, &u), cont))
        })
        .collect()
}

fn run_trial(cfg: &ConvergenceConfig, n: usize, trial: usize) -> Result<TrialResult> {
    let seed = derive_seed(cfg.seed, n as u64, trial as u64);
    let g = generate(&cfg.space, &cfg.density, &cfg.hub_config(n, seed))?;
    let pairs = probe_values(&g, cfg)?;
    let errs: Vec<f64> = pairs.iter().map(|(a, b)| a - b).collect();
    Ok(TrialResult {
        n,
        trial,
        mse: errs.iter().map(|e| e * e).sum::<f64>() / errs.len() as f64,
        sup_err: errs.iter().fold(0.0, |m, e| m.max(e.abs())),
    })
}

/// Runs every `(N, trial)` pair. Each pair draws its graph from its own
/// derived seed, so results do not depend on scheduling.
pub fn run_convergence(cfg: &ConvergenceConfig) -> Result<ConvergenceReport> {
    cfg.validate()?;
    let jobs: Vec<(usize, usize)> = cfg
        .n_grid
        .iter()
        .flat_map(|&n| (0..cfg.trials).map(move |t| (n, t)))
        .collect();
    #[cfg(feature = "parallel")]
    let results: Vec<Result<TrialResult>> = {
        use rayon::prelude::*;
        jobs.par_iter().map(|&(n, t)| run_trial(cfg, n, t)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<TrialResult>> = jobs.iter().map(|&(n, t)| run_trial(cfg, n, t)).collect();
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;

    let mut mse = Vec::with_capacity(cfg.n_grid.len());
    let mut sup_err = Vec::with_capacity(cfg.n_grid.len());
    let mut sup_ratio = Vec::with_capacity(cfg.n_grid.len());
    for (k, &n) in cfg.n_grid.iter().enumerate() {
        let rows = &results[k * cfg.trials..(k + 1) * cfg.trials];
        let m: Vec<f64> = rows.iter().map(|r| r.mse).collect();
        let s: Vec<f64> = rows.iter().map(|r| r.sup_err).collect();
        let nf = n as f64;
        let sup = median(&s);
        mse.push(mean(&m));
        sup_err.push(sup);
        sup_ratio.push(sup / (((1.0 / cfg.p).ln() + nf.ln()) / nf).sqrt());
    }
    let log_n: Vec<f64> = cfg.n_grid.iter().map(|&n| (n as f64).ln()).collect();
    let log_mse: Vec<f64> = mse.iter().map(|m| m.ln()).collect();
    let (fitted_slope, fitted_intercept) = linear_fit(&log_n, &log_mse);
    Ok(ConvergenceReport {
        config: cfg.clone(),
        n_grid: cfg.n_grid.clone(),
        mse,
        sup_err,
        sup_ratio,
        trials: cfg.trials,
        fitted_slope,
        fitted_intercept,
        results,
    })
}
