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

//! One function per subcommand. Each writes its files into the output
//! directory and returns the summary printed on stdout.

use nalgebra::DMatrix;
use nugg::convergence::{operator_rho, run_convergence, ConvergenceConfig};
use nugg::density::{expected_average_degree, expected_degree, AngularDensity, BallMethod};
use nugg::estimate::{estimate_density, true_volumes, EstimateMethod};
use nugg::geometry::LatentSpace;
use nugg::graphgen::{generate, Alpha, GeometricGraph, HubConfig};
use nugg::gso::{symmetric_eigenvalues, symmetrized, to_dense_csv, SparseGso, DENSE_EIGEN_LIMIT};
use nugg::io::{edges_csv, nodes_csv, GraphFile};
use nugg::stats::{mean, median, pearson};
use serde::Serialize;
use serde_json::json;

use crate::config::RunConfig;
use crate::output::OutDir;
use crate::CliError;

/// Largest operator handed to the dense non-symmetric eigensolver.
const COMPLEX_EIGEN_LIMIT: usize = 400;

fn finish(out: &OutDir, cfg: &RunConfig, name: &str, summary: &impl Serialize) -> Result<String, CliError> {
    let mut text = serde_json::to_string_pretty(summary).map_err(nugg::Error::from)?;
    text.push('\n');
    out.write(&format!("{name}_summary.json"), &text)?;
    out.write(&format!("{name}_config.json"), &cfg.to_json()?)?;
    Ok(text)
}

fn load_graph(cfg: &RunConfig) -> Result<(GeometricGraph, Option<AngularDensity>), CliError> {
    let path = cfg
        .graph
        .as_ref()
        .ok_or_else(|| CliError::Usage(format!("`{}` requires --graph <graph.json>", cfg.command)))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read graph {}: {e}", path.display())))?;
    let file: GraphFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("invalid graph file {}: {e}", path.display())))?;
    let density = file.density.clone();
    Ok((file.into_graph()?, density))
}

/// Leading-order mean degree of `n` nodes at constant radius, when a
/// closed form exists.
fn formula_mean_degree(space: &LatentSpace, density: &AngularDensity, g: &GeometricGraph) -> Option<f64> {
    if !g.hub_seeds.is_empty() {
        return None;
    }
    expected_average_degree(space, density, g.alpha, (g.n() as f64 - 1.0).max(0.0)).ok()
}

pub fn gen(cfg: &RunConfig) -> Result<String, CliError> {
    let n = cfg.n.ok_or_else(|| CliError::Usage("`gen` requires --n".into()))?;
    let density = cfg.density.clone().unwrap_or_else(AngularDensity::uniform);
    let hub_cfg = HubConfig {
        n,
        hubs: cfg.hubs,
        alpha: cfg.alpha.unwrap_or(Alpha::Auto),
        beta: cfg.beta,
        epsilon: cfg.epsilon,
        seed: cfg.seed,
    };
    let g = generate(&cfg.space, &density, &hub_cfg)?;
    let out = OutDir::create(&cfg.out)?;
    out.write("graph.json", &GraphFile::from(&g).with_density(&density).to_json()?)?;
    out.write("edges.csv", &edges_csv(&g.edges)?)?;
    out.write("nodes.csv", &nodes_csv(&g, &[])?)?;
    let summary = json!({
        "nodes": g.n(),
        "edges": g.edges.len(),
        "mean_degree": g.mean_degree(),
        "hub_count": g.hub_count(),
        "hub_seeds": g.hub_seeds,
        "alpha": g.alpha,
        "beta": g.beta,
        "epsilon": g.epsilon,
        "expected_mean_degree": formula_mean_degree(&cfg.space, &density, &g),
    });
    finish(&out, cfg, "gen", &summary)
}

fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    (m - m.transpose()).amax()
}

pub fn gso(cfg: &RunConfig) -> Result<String, CliError> {
    let (g, _) = load_graph(cfg)?;
    let spec = cfg.gso_spec()?;
    let rho = operator_rho(&g, cfg.rho)?;
    let op = SparseGso::build(g.n(), &g.edges, &rho, &spec)?;
    let out = OutDir::create(&cfg.out)?;
    out.write("gso_triplets.csv", &op.to_triplets())?;
    let n = g.n();
    // Non-symmetric operators go through a similar symmetric matrix when the
    // modulations allow it; the general complex eigensolver is kept for small N.
    let mut symmetric = false;
    let (radius, lo, hi) = if n == 0 {
        (0.0, None, None)
    } else if n <= DENSE_EIGEN_LIMIT {
        let dense = op.to_dense();
        out.write("gso.csv", &to_dense_csv(&dense))?;
        symmetric = max_asymmetry(&dense) <= 1e-12 * dense.amax().max(f64::MIN_POSITIVE);
        let similar = if symmetric {
            Some((&dense + dense.transpose()) * 0.5)
        } else {
            symmetrized(n, &g.edges, &rho, &spec)?
        };
        if let Some(sym) = similar {
            let ev = symmetric_eigenvalues(&sym)?;
            (ev[0].abs().max(ev[n - 1].abs()), Some(ev[0]), Some(ev[n - 1]))
        } else if n <= COMPLEX_EIGEN_LIMIT {
            let ev = dense.complex_eigenvalues();
            let radius = ev.iter().fold(0.0f64, |m, z| m.max(z.norm()));
            let lo = ev.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
            let hi = ev.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
            (radius, Some(lo), Some(hi))
        } else {
            (op.spectral_radius(1e-10, 100_000)?, None, None)
        }
    } else {
        (op.spectral_radius(1e-10, 100_000)?, None, None)
    };
    let bound = 2.0 * (n as f64).sqrt();
    let summary = json!({
        "n": n,
        "preset": spec.preset,
        "spec": spec,
        "rho": cfg.rho,
        "symmetric": symmetric,
        "spectral_radius": radius,
        "min_eigenvalue": lo,
        "max_eigenvalue": hi,
        "two_sqrt_n": bound,
        "within_two_sqrt_n": radius <= bound,
    });
    finish(&out, cfg, "gso", &summary)
}

pub fn converge(cfg: &RunConfig) -> Result<String, CliError> {
    let cc = ConvergenceConfig {
        space: cfg.space,
        density: cfg.density.clone().unwrap_or_else(AngularDensity::uniform),
        n_grid: cfg.n_grid.clone(),
        trials: cfg.trials,
        alpha: cfg.alpha.unwrap_or(Alpha::Fixed(0.1)),
        hubs: cfg.hubs,
        beta: cfg.beta,
        epsilon: cfg.epsilon,
        spec: cfg.gso_spec()?,
        signal: cfg.signal,
        p: cfg.p,
        rho: cfg.rho,
        seed: cfg.seed,
        probes: cfg.probes,
    };
    let report = run_convergence(&cc)?;
    let out = OutDir::create(&cfg.out)?;
    let mut text = serde_json::to_string_pretty(&report).map_err(nugg::Error::from)?;
    text.push('\n');
    out.write("convergence.json", &text)?;
    out.write("convergence.csv", &report.to_csv())?;
    let summary = json!({
        "n_grid": report.n_grid,
        "mse": report.mse,
        "sup_err": report.sup_err,
        "sup_ratio": report.sup_ratio,
        "sup_ratio_spearman": report.sup_ratio_trend(),
        "fitted_slope": report.fitted_slope,
    });
    finish(&out, cfg, "converge", &summary)
}

fn ball_method(space: &LatentSpace, density: &AngularDensity) -> BallMethod {
    if density.as_sbrv().is_some() && !matches!(space, LatentSpace::Sphere) {
        BallMethod::ClosedForm
    } else {
        BallMethod::Quadrature
    }
}

fn estimate_for(
    g: &GeometricGraph,
    method: Option<EstimateMethod>,
) -> Result<nugg::estimate::DensityEstimate, CliError> {
    match method {
        Some(EstimateMethod::DegreeOnly) => Ok(estimate_density(g, None)?),
        Some(EstimateMethod::DegreeOverVolume) => Ok(estimate_density(g, Some(&true_volumes(g)?))?),
        None => {
            let volumes = true_volumes(g).ok();
            Ok(estimate_density(g, volumes.as_deref())?)
        }
    }
}

pub fn degrees(cfg: &RunConfig) -> Result<String, CliError> {
    let (g, file_density) = load_graph(cfg)?;
    let density = cfg
        .density
        .clone()
        .or(file_density)
        .unwrap_or_else(AngularDensity::uniform);
    let method = ball_method(&g.space, &density);
    let others = (g.n() as f64 - 1.0).max(0.0);
    let expected = (0..g.n())
        .map(|i| expected_degree(&g.space, &density, &g.positions[i], g.radius[i], others, method))
        .collect::<Result<Vec<f64>, _>>()?;
    let empirical: Vec<f64> = g.degrees().into_iter().map(|d| d as f64).collect();
    let est = estimate_for(&g, cfg.estimate_method)?;
    let expected_col: Vec<Option<f64>> = expected.iter().map(|&e| Some(e)).collect();
    let out = OutDir::create(&cfg.out)?;
    out.write(
        "degrees.csv",
        &nodes_csv(&g, &[("expected_degree", &expected_col), ("rho_hat", &est.rho_hat)])?,
    )?;
    let summary = json!({
        "n": g.n(),
        "ball_method": method,
        "mean_degree": mean(&empirical),
        "mean_expected_degree": mean(&expected),
        "expected_mean_degree": formula_mean_degree(&g.space, &density, &g),
        "pearson_expected_empirical": pearson(&expected, &empirical),
    });
    finish(&out, cfg, "degrees", &summary)
}

pub fn estimate(cfg: &RunConfig) -> Result<String, CliError> {
    let (g, _) = load_graph(cfg)?;
    let est = estimate_for(&g, cfg.estimate_method)?;
    let out = OutDir::create(&cfg.out)?;
    out.write("nodes.csv", &nodes_csv(&g, &[("rho_hat", &est.rho_hat)])?)?;
    let defined: Vec<f64> = est.rho_hat.iter().flatten().copied().collect();
    let summary = json!({
        "n": g.n(),
        "method": est.method,
        "undefined": est.undefined,
        "median_rho_hat": (!defined.is_empty()).then(|| median(&defined)),
        "relative_l2_error": est.relative_l2_error(&g.rho_true).ok(),
    });
    finish(&out, cfg, "estimate", &summary)
}
