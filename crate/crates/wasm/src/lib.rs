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

//! Browser bindings for the demo page. Every export takes plain numbers and
//! JSON strings and returns a JSON string; errors become rejected calls.

use std::f64::consts::PI;

use nugg::convergence::{run_convergence, ConvergenceConfig, RhoMode};
use nugg::density::AngularDensity;
use nugg::estimate::{estimate_density, true_volumes};
use nugg::geometry::{LatentSpace, Point};
use nugg::graphgen::{generate, Alpha, HubConfig};
use nugg::gso::preset;
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Largest graph the page may request; keeps brute-force edges interactive.
pub const MAX_NODES: u32 = 5000;

fn space_from(name: &str, radius: f64) -> Result<LatentSpace, String> {
    match name {
        "s1" => Ok(LatentSpace::UnitCircle),
        "disk" => Ok(LatentSpace::UnitDisk),
        "sphere" => Ok(LatentSpace::Sphere),
        "hyperbolic" => LatentSpace::hyperbolic(radius).map_err(|e| e.to_string()),
        other => Err(format!("unknown space `{other}`")),
    }
}

/// Planar drawing coordinates in the unit disk: the circle itself, the disk
/// as is, the sphere by its azimuthal equal-area map and the hyperbolic disk
/// in the Poincare model.
fn draw(space: &LatentSpace, p: &Point) -> (f64, f64) {
    let rho = match *space {
        LatentSpace::UnitCircle => 1.0,
        LatentSpace::UnitDisk => p.r,
        LatentSpace::Sphere => (0.5 * p.r).sin(),
        LatentSpace::HyperbolicDisk { .. } => (0.5 * p.r).tanh(),
    };
    (rho * p.theta.cos(), rho * p.theta.sin())
}

/// Samples a graph; `alpha <= 0` selects the connectivity radius.
pub fn sample_graph(
    space: &str,
    radius: f64,
    density: &str,
    n: u32,
    alpha: f64,
    hubs: u32,
    seed: u32,
) -> Result<String, String> {
    if n == 0 || n > MAX_NODES {
        return Err(format!("node count must lie in 1..={MAX_NODES}"));
    }
    let space = space_from(space, radius)?;
    let density = AngularDensity::parse(density).map_err(|e| e.to_string())?;
    let cfg = HubConfig {
        alpha: if alpha > 0.0 { Alpha::Fixed(alpha) } else { Alpha::Auto },
        ..HubConfig::new(n as usize, 1.0, u64::from(seed)).with_hubs(hubs as usize)
    };
    let g = generate(&space, &density, &cfg).map_err(|e| e.to_string())?;
    let xy: Vec<[f64; 2]> = g
        .positions
        .iter()
        .map(|p| draw(&space, p))
        .map(|(x, y)| [x, y])
        .collect();
    let rho_hat = true_volumes(&g)
        .ok()
        .and_then(|v| estimate_density(&g, Some(&v)).ok())
        .map(|e| e.rho_hat);
    Ok(json!({
        "xy": xy,
        "edges": g.edges,
        "hub": g.is_hub,
        "degree": g.degrees(),
        "rho": g.rho_true,
        "rho_hat": rho_hat,
        "alpha": g.alpha,
        "mean_degree": g.mean_degree(),
    })
    .to_string())
}

/// `f(theta)` on `points` equally spaced angles.
pub fn density_values(density: &str, points: u32) -> Result<String, String> {
    let d = AngularDensity::parse(density).map_err(|e| e.to_string())?;
    let points = points.clamp(2, 4096);
    let theta: Vec<f64> = (0..points)
        .map(|k| -PI + 2.0 * PI * f64::from(k) / f64::from(points - 1))
        .collect();
    let f: Vec<f64> = theta.iter().map(|&t| d.eval(t)).collect();
    Ok(json!({ "theta": theta, "f": f }).to_string())
}

/// Small random-walk convergence run on the circle with `u = cos theta`.
pub fn convergence_values(
    density: &str,
    alpha: f64,
    n_grid: &str,
    trials: u32,
    rho: &str,
    seed: u32,
) -> Result<String, String> {
    let grid: Vec<usize> = n_grid
        .split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|_| format!("bad N `{s}`")))
        .collect::<Result<_, _>>()?;
    if grid.iter().any(|&n| n > MAX_NODES as usize) {
        return Err(format!("N must not exceed {MAX_NODES}"));
    }
    let rho: RhoMode = rho.parse().map_err(|e: nugg::Error| e.to_string())?;
    let mut cfg = ConvergenceConfig::circle(
        preset("random_walk").map_err(|e| e.to_string())?,
        alpha,
        grid,
        trials as usize,
        u64::from(seed),
    );
    cfg.density = AngularDensity::parse(density).map_err(|e| e.to_string())?;
    cfg.rho = rho;
    let r = run_convergence(&cfg).map_err(|e| e.to_string())?;
    Ok(json!({
        "n_grid": r.n_grid,
        "mse": r.mse,
        "sup_err": r.sup_err,
        "slope": r.fitted_slope,
    })
    .to_string())
}

#[wasm_bindgen]
pub fn generate_graph(
    space: &str,
    radius: f64,
    density: &str,
    n: u32,
    alpha: f64,
    hubs: u32,
    seed: u32,
) -> Result<String, JsError> {
    sample_graph(space, radius, density, n, alpha, hubs, seed).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn density_curve(density: &str, points: u32) -> Result<String, JsError> {
    density_values(density, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn convergence_curve(
    density: &str,
    alpha: f64,
    n_grid: &str,
    trials: u32,
    rho: &str,
    seed: u32,
) -> Result<String, JsError> {
    convergence_values(density, alpha, n_grid, trials, rho, seed).map_err(|e| JsError::new(&e))
}
