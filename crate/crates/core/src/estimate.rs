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

//! Degree-based density estimates and per-node input features.
//!
//! The fraction of nodes in a neighbourhood estimates its `nu` measure, so
//! `deg / N` divided by the neighbourhood's `mu` measure estimates the
//! density there. Without volumes only proportionality to degree is
//! available and the scale is fixed by `mean(1 / rho_hat) = 1`, the sample
//! identity `E[1 / rho] = 1` under `nu`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, invalid, Result};
use crate::graphgen::GeometricGraph;
use crate::neighborhood::{neighborhood_volume, RadiusField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateMethod {
    DegreeOnly,
    DegreeOverVolume,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    /// `None` for isolated nodes, where no estimate exists.
    pub rho_hat: Vec<Option<f64>>,
    pub method: EstimateMethod,
    /// Indices of the isolated nodes, ascending.
    pub undefined: Vec<usize>,
}

impl DensityEstimate {
    /// Estimates with isolated nodes replaced by `fill`.
    pub fn filled(&self, fill: f64) -> Vec<f64> {
        self.rho_hat.iter().map(|r| r.unwrap_or(fill)).collect()
    }

    /// `||rho_hat - rho|| / ||rho||` over the nodes with an estimate.
    pub fn relative_l2_error(&self, rho_true: &[f64]) -> Result<f64> {
        if rho_true.len() != self.rho_hat.len() {
            return Err(invalid("reference density has the wrong length"));
        }
        let (num, den) = self
            .rho_hat
            .iter()
            .zip(rho_true)
            .filter_map(|(h, t)| h.map(|h| ((h - t).powi(2), t * t)))
            .fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
        if den == 0.0 {
            return Err(domain("no node has an estimate"));
        }
        Ok((num / den).sqrt())
    }
}

/// `rho_hat_i = (deg_i / N) / mu(N(x_i))` with the given volumes, or
/// `rho_hat_i ~ deg_i` normalized by [`normalize_inverse_mean`] without them.
pub fn estimate_density(g: &GeometricGraph, volumes: Option<&[f64]>) -> Result<DensityEstimate> {
    let n = g.n();
    let deg = g.degrees();
    let undefined: Vec<usize> = (0..n).filter(|&i| deg[i] == 0).collect();
    let nf = n as f64;
    let (rho_hat, method) = match volumes {
        Some(vol) => {
            if vol.len() != n {
                return Err(invalid(format!("{} volumes given for {n} nodes", vol.len())));
            }
            if let Some(i) = vol.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
                return Err(domain(format!("neighbourhood volume at node {i} must be positive")));
            }
            let est = (0..n)
                .map(|i| (deg[i] > 0).then(|| deg[i] as f64 / nf / vol[i]))
                .collect();
            (est, EstimateMethod::DegreeOverVolume)
        }
        None => {
            let defined: Vec<f64> = deg.iter().filter(|&&d| d > 0).map(|&d| d as f64).collect();
            let mut normalized = if defined.is_empty() {
                Vec::new()
            } else {
                normalize_inverse_mean(&defined)?
            }
            .into_iter();
            let est = deg
                .iter()
                .map(|&d| if d > 0 { normalized.next() } else { None })
                .collect();
            (est, EstimateMethod::DegreeOnly)
        }
    };
    Ok(DensityEstimate {
        rho_hat,
        method,
        undefined,
    })
}

/// Exact `mu(N(x_i))` for every node of a generated graph, from its own
/// radius field.
pub fn true_volumes(g: &GeometricGraph) -> Result<Vec<f64>> {
    let field = RadiusField::from_graph(g);
    g.positions
        .iter()
        .map(|p| neighborhood_volume(&g.space, &field, p))
        .collect()
}

/// Scales a positive sequence so the mean of its reciprocals is exactly 1.
pub fn normalize_inverse_mean(rho: &[f64]) -> Result<Vec<f64>> {
    if rho.is_empty() {
        return Err(invalid("cannot normalize an empty sequence"));
    }
    if let Some(i) = rho.iter().position(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(domain(format!("entry {i} must be positive and finite, got {}", rho[i])));
    }
    let inv_mean = rho.iter().map(|r| 1.0 / r).sum::<f64>() / rho.len() as f64;
    Ok(rho.iter().map(|r| r * inv_mean).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeFeatures {
    /// `1 / deg`, or 0 for an isolated node.
    pub inv_degree: f64,
    /// `1 / mean neighbour degree`, or 0 for an isolated node.
    pub inv_neighbor_degree: f64,
    pub isolated: bool,
}

pub fn pnet_features(g: &GeometricGraph) -> Vec<NodeFeatures> {
    features_from_edges(g.n(), &g.edges)
}

/// [`pnet_features`] on a bare edge list.
pub fn features_from_edges(n: usize, edges: &[(usize, usize)]) -> Vec<NodeFeatures> {
    let adj = crate::graphgen::adjacency_lists(n, edges);
    let deg: Vec<usize> = adj.iter().map(Vec::len).collect();
    adj.iter()
        .map(|nb| {
            if nb.is_empty() {
                return NodeFeatures {
                    inv_degree: 0.0,
                    inv_neighbor_degree: 0.0,
                    isolated: true,
                };
            }
            let total: usize = nb.iter().map(|&j| deg[j]).sum();
            NodeFeatures {
                inv_degree: 1.0 / nb.len() as f64,
                inv_neighbor_degree: nb.len() as f64 / total as f64,
                isolated: false,
            }
        })
        .collect()
}
