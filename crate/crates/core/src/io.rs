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

//! On-disk graph formats.
//!
//! JSON: `{space, alpha, beta, epsilon, hub_seeds, nodes: [{theta, r?, rho,
//! hub, radius}], edges: [[i, j]]}`. CSV: an edge list `source,target` and a
//! node sidecar `id,theta,r,rho,hub,radius,degree` followed by any extra
//! per-node columns. `r` is empty on the circle, as are undefined extras.
//! Floats are written in shortest round-trip form, so output is a pure
//! function of the graph.

use serde::{Deserialize, Serialize};

use crate::density::AngularDensity;
use crate::error::{invalid, Error, Result};
use crate::geometry::{LatentSpace, Point};
use crate::graphgen::GeometricGraph;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub theta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    pub rho: f64,
    pub hub: bool,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub space: LatentSpace,
    /// Generating density, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<AngularDensity>,
    pub alpha: f64,
    pub beta: f64,
    pub epsilon: f64,
    #[serde(default)]
    pub hub_seeds: Vec<usize>,
    pub nodes: Vec<NodeRecord>,
    pub edges: Vec<[usize; 2]>,
}

impl From<&GeometricGraph> for GraphFile {
    fn from(g: &GeometricGraph) -> Self {
        let circle = g.space.is_circle();
        let nodes = (0..g.n())
            .map(|i| NodeRecord {
                theta: g.positions[i].theta,
                r: (!circle).then_some(g.positions[i].r),
                rho: g.rho_true[i],
                hub: g.is_hub[i],
                radius: g.radius[i],
            })
            .collect();
        Self {
            space: g.space,
            density: None,
            alpha: g.alpha,
            beta: g.beta,
            epsilon: g.epsilon,
            hub_seeds: g.hub_seeds.clone(),
            nodes,
            edges: g.edges.iter().map(|&(i, j)| [i, j]).collect(),
        }
    }
}

impl GraphFile {
    /// Validates positions and edges and rebuilds the graph. Edges are
    /// stored as `(min, max)`, sorted and deduplicated.
    pub fn into_graph(self) -> Result<GeometricGraph> {
        let n = self.nodes.len();
        let mut positions = Vec::with_capacity(n);
        for (i, node) in self.nodes.iter().enumerate() {
            let p = Point {
                theta: node.theta,
                r: node.r.unwrap_or(0.0),
            };
            self.space.validate(&p).map_err(|e| invalid(format!("node {i}: {e}")))?;
            if !(node.rho.is_finite() && node.rho > 0.0) {
                return Err(invalid(format!("node {i}: rho must be positive, got {}", node.rho)));
            }
            positions.push(p);
        }
        if let Some(&s) = self.hub_seeds.iter().find(|&&s| s >= n) {
            return Err(invalid(format!("hub seed {s} is out of range for {n} nodes")));
        }
        let mut edges = Vec::with_capacity(self.edges.len());
        for [i, j] in self.edges {
            if i >= n || j >= n || i == j {
                return Err(invalid(format!("invalid edge [{i}, {j}] for {n} nodes")));
            }
            edges.push((i.min(j), i.max(j)));
        }
        edges.sort_unstable();
        edges.dedup();
        Ok(GeometricGraph {
            space: self.space,
            positions,
            rho_true: self.nodes.iter().map(|v| v.rho).collect(),
            is_hub: self.nodes.iter().map(|v| v.hub).collect(),
            radius: self.nodes.iter().map(|v| v.radius).collect(),
            edges,
            alpha: self.alpha,
            beta: self.beta,
            epsilon: self.epsilon,
            hub_seeds: self.hub_seeds,
        })
    }
}

impl GraphFile {
    pub fn with_density(mut self, density: &AngularDensity) -> Self {
        self.density = Some(density.clone());
        self
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

pub fn graph_to_json(g: &GeometricGraph) -> Result<String> {
    GraphFile::from(g).to_json()
}

pub fn graph_from_json(text: &str) -> Result<GeometricGraph> {
    serde_json::from_str::<GraphFile>(text)?.into_graph()
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

pub fn edges_csv(edges: &[(usize, usize)]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["source", "target"])?;
    for &(i, j) in edges {
        w.write_record([i.to_string(), j.to_string()])?;
    }
    finish(w)
}

pub fn read_edges_csv(text: &str) -> Result<Vec<(usize, usize)>> {
    #[derive(Deserialize)]
    struct Row {
        source: usize,
        target: usize,
    }
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.deserialize::<Row>()
        .map(|row| row.map(|e| (e.source, e.target)).map_err(Error::from))
        .collect()
}

/// Extra node column: a header and one optional value per node.
pub type Column<'a> = (&'a str, &'a [Option<f64>]);

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Node sidecar with the fixed columns followed by `extra`.
pub fn nodes_csv(g: &GeometricGraph, extra: &[Column<'_>]) -> Result<String> {
    let n = g.n();
    if let Some((name, _)) = extra.iter().find(|(_, v)| v.len() != n) {
        return Err(invalid(format!("column `{name}` does not have {n} entries")));
    }
    let deg = g.degrees();
    let circle = g.space.is_circle();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["id", "theta", "r", "rho", "hub", "radius", "degree"];
    header.extend(extra.iter().map(|(name, _)| *name));
    w.write_record(&header)?;
    for i in 0..n {
        let mut row = vec![
            i.to_string(),
            g.positions[i].theta.to_string(),
            cell((!circle).then_some(g.positions[i].r)),
            g.rho_true[i].to_string(),
            g.is_hub[i].to_string(),
            g.radius[i].to_string(),
            deg[i].to_string(),
        ];
        row.extend(extra.iter().map(|(_, v)| cell(v[i])));
        w.write_record(&row)?;
    }
    finish(w)
}

/// Parsed node sidecar row. `rho_hat` is read when the column exists.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct NodeRow {
    pub id: usize,
    pub theta: f64,
    pub r: Option<f64>,
    pub rho: f64,
    pub hub: bool,
    pub radius: f64,
    pub degree: usize,
    #[serde(default)]
    pub rho_hat: Option<f64>,
}

pub fn read_nodes_csv(text: &str) -> Result<Vec<NodeRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.deserialize::<NodeRow>().map(|row| row.map_err(Error::from)).collect()
}
