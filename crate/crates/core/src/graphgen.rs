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

//! Geometric graphs with hubs.
//!
//! Nodes are drawn i.i.d. from the sampling measure, `m` of them are chosen
//! uniformly as hub seeds, and every node within `epsilon` of a seed becomes
//! a hub with radius `alpha + beta`; all other nodes keep radius `alpha`.
//! Nodes `i != j` are joined iff `d(x_i, x_j) <= max(r_i, r_j)`.

use std::collections::HashMap;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::density::{sample_angles, sample_radii, AngularDensity, RadialLaw};
use crate::error::{invalid, Result};
use crate::geometry::{LatentSpace, Point, Prepared};

/// Above this node count edges are found with the spatial grid.
pub const BRUTE_FORCE_LIMIT: usize = 20_000;

/// Safety factor applied to the bottleneck radius.
pub const AUTO_ALPHA_FACTOR: f64 = 1.0001;

/// Base neighbourhood radius: a fixed value or the connectivity bottleneck.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Alpha {
    Fixed(f64),
    Auto,
}

impl Serialize for Alpha {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Alpha::Fixed(a) => s.serialize_f64(*a),
            Alpha::Auto => s.serialize_str("auto"),
        }
    }
}

impl<'de> Deserialize<'de> for Alpha {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(a) => Ok(Alpha::Fixed(a)),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

impl std::str::FromStr for Alpha {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("auto") {
            return Ok(Alpha::Auto);
        }
        s.trim()
            .parse::<f64>()
            .map(Alpha::Fixed)
            .map_err(|_| invalid(format!("alpha must be a number or `auto`, got `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HubConfig {
    pub n: usize,
    /// Number of hub seeds `m`.
    #[serde(default)]
    pub hubs: usize,
    pub alpha: Alpha,
    /// Hub radius increment; defaults to `3 alpha`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// Hub spreading distance; defaults to `alpha / 10`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

impl HubConfig {
    /// Fixed-radius graph without hubs.
    pub fn new(n: usize, alpha: f64, seed: u64) -> Self {
        Self {
            n,
            hubs: 0,
            alpha: Alpha::Fixed(alpha),
            beta: None,
            epsilon: None,
            seed,
        }
    }

    pub fn with_hubs(mut self, hubs: usize) -> Self {
        self.hubs = hubs;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(invalid("node count must be at least 1"));
        }
        if self.hubs > self.n {
            return Err(invalid(format!(
                "{} hub seeds requested for {} nodes",
                self.hubs, self.n
            )));
        }
        if let Alpha::Fixed(a) = self.alpha {
            if !(a.is_finite() && a >= 0.0) {
                return Err(invalid(format!("alpha must be finite and non-negative, got {a}")));
            }
        } else if self.n < 2 {
            return Err(invalid("alpha = auto needs at least two nodes"));
        }
        for (name, v) in [("beta", self.beta), ("epsilon", self.epsilon)] {
            if let Some(v) = v {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(invalid(format!("{name} must be finite and non-negative, got {v}")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EdgeStrategy {
    /// Brute force up to [`BRUTE_FORCE_LIMIT`] nodes, grid above.
    #[default]
    Auto,
    BruteForce,
    Grid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeometricGraph {
    pub space: LatentSpace,
    pub positions: Vec<Point>,
    /// Radon–Nikodym derivative of the sampling measure at each node.
    pub rho_true: Vec<f64>,
    pub is_hub: Vec<bool>,
    pub radius: Vec<f64>,
    /// Unordered pairs stored as `(i, j)` with `i < j`, sorted.
    pub edges: Vec<(usize, usize)>,
    pub alpha: f64,
    pub beta: f64,
    pub epsilon: f64,
    /// Indices of the hub seeds, ascending.
    pub hub_seeds: Vec<usize>,
}

impl GeometricGraph {
    pub fn n(&self) -> usize {
        self.positions.len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        degrees(self.n(), &self.edges)
    }

    pub fn mean_degree(&self) -> f64 {
        2.0 * self.edges.len() as f64 / self.n() as f64
    }

    pub fn hub_count(&self) -> usize {
        self.is_hub.iter().filter(|&&h| h).count()
    }

    /// Sorted neighbour lists.
    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        adjacency_lists(self.n(), &self.edges)
    }

    pub fn hub_seed_points(&self) -> Vec<Point> {
        self.hub_seeds.iter().map(|&i| self.positions[i]).collect()
    }
}

pub fn degrees(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let mut deg = vec![0; n];
    for &(i, j) in edges {
        deg[i] += 1;
        deg[j] += 1;
    }
    deg
}

pub fn adjacency_lists(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for &(i, j) in edges {
        adj[i].push(j);
        adj[j].push(i);
    }
    for a in &mut adj {
        a.sort_unstable();
    }
    adj
}

/// Samples `n` positions from the density on `space`: angles first, then
/// radii, both drawn from one ChaCha8 stream seeded with `seed`.
pub fn sample_positions(space: &LatentSpace, density: &AngularDensity, n: usize, seed: u64) -> Result<Vec<Point>> {
    draw_positions(space, density, n, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn draw_positions(space: &LatentSpace, density: &AngularDensity, n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Point>> {
    let angles = sample_angles(density, rng, n)?;
    if space.is_circle() {
        return Ok(angles.into_iter().map(Point::angle).collect());
    }
    let radii = sample_radii(&RadialLaw::new(*space)?, rng, n);
    Ok(angles.into_iter().zip(radii).map(|(t, r)| Point::polar(r, t)).collect())
}

pub fn generate(space: &LatentSpace, density: &AngularDensity, cfg: &HubConfig) -> Result<GeometricGraph> {
    generate_with(space, density, cfg, EdgeStrategy::Auto)
}

pub fn generate_with(
    space: &LatentSpace,
    density: &AngularDensity,
    cfg: &HubConfig,
    strategy: EdgeStrategy,
) -> Result<GeometricGraph> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let positions = draw_positions(space, density, cfg.n, &mut rng)?;
    let alpha = match cfg.alpha {
        Alpha::Fixed(a) => a,
        Alpha::Auto => auto_alpha(space, &positions)?,
    };
    let beta = cfg.beta.unwrap_or(3.0 * alpha);
    let epsilon = cfg.epsilon.unwrap_or(alpha / 10.0);
    let mut hub_seeds = index::sample(&mut rng, cfg.n, cfg.hubs).into_vec();
    hub_seeds.sort_unstable();

    let prepared: Vec<Prepared> = positions.iter().map(Prepared::new).collect();
    let is_hub: Vec<bool> = prepared
        .iter()
        .map(|p| {
            hub_seeds
                .iter()
                .any(|&s| space.distance_prepared(p, &prepared[s]) <= epsilon)
        })
        .collect();
    let radius: Vec<f64> = is_hub.iter().map(|&h| if h { alpha + beta } else { alpha }).collect();
    let edges = edges_prepared(space, &prepared, &radius, strategy);
    let rho_true = positions.iter().map(|p| density.rho(p.theta)).collect();
    Ok(GeometricGraph {
        space: *space,
        positions,
        rho_true,
        is_hub,
        radius,
        edges,
        alpha,
        beta,
        epsilon,
        hub_seeds,
    })
}

/// Edge set of the max-radius rule for arbitrary per-node radii.
pub fn build_edges(
    space: &LatentSpace,
    positions: &[Point],
    radius: &[f64],
    strategy: EdgeStrategy,
) -> Vec<(usize, usize)> {
    assert_eq!(positions.len(), radius.len(), "one radius per position");
    let prepared: Vec<Prepared> = positions.iter().map(Prepared::new).collect();
    edges_prepared(space, &prepared, radius, strategy)
}

fn edges_prepared(
    space: &LatentSpace,
    pts: &[Prepared],
    radius: &[f64],
    strategy: EdgeStrategy,
) -> Vec<(usize, usize)> {
    let brute = match strategy {
        EdgeStrategy::BruteForce => true,
        EdgeStrategy::Grid => false,
        EdgeStrategy::Auto => pts.len() <= BRUTE_FORCE_LIMIT,
    };
    if brute {
        brute_force_edges(space, pts, radius)
    } else {
        grid_edges(space, pts, radius)
    }
}

fn brute_force_edges(space: &LatentSpace, pts: &[Prepared], radius: &[f64]) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            if space.distance_prepared(&pts[i], &pts[j]) <= radius[i].max(radius[j]) {
                edges.push((i, j));
            }
        }
    }
    edges
}

type Cell = [i64; 3];

/// Uniform hash grid over the Euclidean embedding. Each node queries the
/// cells overlapped by the embedded image of its own ball; a pair is found
/// from the endpoint with the larger radius, so the result equals the brute
/// force edge set exactly.
fn grid_edges(space: &LatentSpace, pts: &[Prepared], radius: &[f64]) -> Vec<(usize, usize)> {
    if pts.len() < 2 {
        return Vec::new();
    }
    let emb: Vec<[f64; 3]> = pts.iter().map(|p| space.embed(p)).collect();
    let balls: Vec<([f64; 3], f64)> = pts
        .iter()
        .zip(radius)
        .map(|(p, &r)| space.embedded_ball(p, r))
        .collect();
    let mut sizes: Vec<f64> = balls.iter().map(|b| b.1).filter(|&q| q > 0.0).collect();
    sizes.sort_by(f64::total_cmp);
    let floor = match space.dimension() {
        1 => std::f64::consts::TAU / pts.len() as f64,
        _ => (4.0 / pts.len() as f64).sqrt(),
    };
    let h = sizes.get(sizes.len() / 2).copied().unwrap_or(floor).max(floor);
    let cell = |x: f64| (x / h).floor() as i64;

    let mut grid: HashMap<Cell, Vec<usize>> = HashMap::new();
    for (i, e) in emb.iter().enumerate() {
        grid.entry([cell(e[0]), cell(e[1]), cell(e[2])]).or_default().push(i);
    }
    let mut edges = Vec::new();
    for (i, &(c, q)) in balls.iter().enumerate() {
        let slack = 1e-9 * (1.0 + q);
        let lo = [cell(c[0] - q - slack), cell(c[1] - q - slack), cell(c[2] - q - slack)];
        let hi = [cell(c[0] + q + slack), cell(c[1] + q + slack), cell(c[2] + q + slack)];
        let span: i64 = (0..3).map(|k| hi[k] - lo[k] + 1).product();
        if span as usize > grid.len() {
            // query box larger than the occupied set: scan occupied cells
            for (key, members) in &grid {
                if (0..3).all(|k| (lo[k]..=hi[k]).contains(&key[k])) {
                    push_matches(space, pts, radius, i, members, &mut edges);
                }
            }
            continue;
        }
        for x in lo[0]..=hi[0] {
            for y in lo[1]..=hi[1] {
                for z in lo[2]..=hi[2] {
                    if let Some(members) = grid.get(&[x, y, z]) {
                        push_matches(space, pts, radius, i, members, &mut edges);
                    }
                }
            }
        }
    }
    edges.sort_unstable();
    edges.dedup();
    edges
}

fn push_matches(
    space: &LatentSpace,
    pts: &[Prepared],
    radius: &[f64],
    i: usize,
    members: &[usize],
    edges: &mut Vec<(usize, usize)>,
) {
    for &j in members {
        if j != i && radius[i] >= radius[j] && space.distance_prepared(&pts[i], &pts[j]) <= radius[i] {
            edges.push((i.min(j), i.max(j)));
        }
    }
}

/// Smallest constant radius connecting all positions (longest edge of a
/// minimum spanning tree, Prim's algorithm on the complete distance graph),
/// times [`AUTO_ALPHA_FACTOR`].
pub fn auto_alpha(space: &LatentSpace, positions: &[Point]) -> Result<f64> {
    if positions.len() < 2 {
        return Err(invalid("auto alpha needs at least two positions"));
    }
    Ok(mst_bottleneck(space, positions) * AUTO_ALPHA_FACTOR)
}

/// Longest minimum-spanning-tree edge.
pub fn mst_bottleneck(space: &LatentSpace, positions: &[Point]) -> f64 {
    let pts: Vec<Prepared> = positions.iter().map(Prepared::new).collect();
    let n = pts.len();
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut current = 0;
    let mut bottleneck: f64 = 0.0;
    in_tree[0] = true;
    for _ in 1..n {
        let mut next = usize::MAX;
        let mut next_d = f64::INFINITY;
        for j in 0..n {
            if in_tree[j] {
                continue;
            }
            let d = space.distance_prepared(&pts[current], &pts[j]);
            if d < best[j] {
                best[j] = d;
            }
            if best[j] < next_d || next == usize::MAX {
                next_d = best[j];
                next = j;
            }
        }
        in_tree[next] = true;
        bottleneck = bottleneck.max(next_d);
        current = next;
    }
    bottleneck
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::SpectrallyBounded;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn two_nodes_with_large_radius_are_joined() {
        for space in [LatentSpace::UnitCircle, LatentSpace::UnitDisk, LatentSpace::Sphere] {
            let cfg = HubConfig::new(2, space.diameter(), 3);
            let g = generate(&space, &AngularDensity::uniform(), &cfg).unwrap();
            assert_eq!(g.edges, vec![(0, 1)]);
        }
    }

    #[test]
    fn no_hubs_means_constant_radius() {
        let cfg = HubConfig {
            beta: Some(5.0),
            ..HubConfig::new(300, 0.05, 1)
        };
        let g = generate(&LatentSpace::UnitDisk, &AngularDensity::uniform(), &cfg).unwrap();
        assert!(g.radius.iter().all(|&r| r == 0.05));
        assert_eq!(g.hub_count(), 0);
    }

    #[test]
    fn degrees_small_cases() {
        assert_eq!(degrees(3, &[]), vec![0, 0, 0]);
        let k4 = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
        assert_eq!(degrees(4, &k4), vec![3, 3, 3, 3]);
    }

    #[test]
    fn handshake_and_edge_invariants() {
        let d: AngularDensity = SpectrallyBounded::new(vec![1.0], vec![1], vec![0.0]).unwrap().into();
        let cfg = HubConfig::new(800, 0.03, 9).with_hubs(4);
        let g = generate(&LatentSpace::UnitCircle, &d, &cfg).unwrap();
        assert_eq!(g.degrees().iter().sum::<usize>(), 2 * g.edges.len());
        assert!(g.edges.iter().all(|&(i, j)| i < j));
        assert!(g.edges.windows(2).all(|w| w[0] < w[1]));
        for (i, &h) in g.is_hub.iter().enumerate() {
            assert_eq!(g.radius[i], if h { 4.0 * 0.03 } else { 0.03 });
        }
        assert!(g.hub_seeds.iter().all(|&s| g.is_hub[s]));
    }

    #[test]
    fn hub_closure_recheck() {
        let cfg = HubConfig {
            epsilon: Some(0.2),
            ..HubConfig::new(500, 0.05, 21).with_hubs(3)
        };
        let space = LatentSpace::UnitDisk;
        let g = generate(&space, &AngularDensity::uniform(), &cfg).unwrap();
        for i in 0..g.n() {
            let near = g
                .hub_seeds
                .iter()
                .any(|&s| space.distance(&g.positions[i], &g.positions[s]).unwrap() <= 0.2);
            assert_eq!(near, g.is_hub[i]);
        }
        assert!(g.hub_count() > 3);
    }

    #[test]
    fn determinism() {
        let space = LatentSpace::hyperbolic(8.0).unwrap();
        let cfg = HubConfig::new(400, 4.0, 5).with_hubs(2);
        let a = generate(&space, &AngularDensity::uniform(), &cfg).unwrap();
        let b = generate(&space, &AngularDensity::uniform(), &cfg).unwrap();
        assert_eq!(a, b);
        let c = generate(&space, &AngularDensity::uniform(), &HubConfig { seed: 6, ..cfg }).unwrap();
        assert_ne!(a.positions, c.positions);
    }

    #[test]
    fn grid_matches_brute_force_on_every_space() {
        let spaces = [
            (LatentSpace::UnitCircle, 0.01),
            (LatentSpace::UnitDisk, 0.04),
            (LatentSpace::Sphere, 0.1),
            (LatentSpace::hyperbolic(10.0).unwrap(), 7.0),
        ];
        let d: AngularDensity = SpectrallyBounded::new(vec![0.7, 0.4], vec![1, 3], vec![0.0, 1.0])
            .unwrap()
            .into();
        for (space, alpha) in spaces {
            let cfg = HubConfig::new(1500, alpha, 77).with_hubs(5);
            let brute = generate_with(&space, &d, &cfg, EdgeStrategy::BruteForce).unwrap();
            let grid = generate_with(&space, &d, &cfg, EdgeStrategy::Grid).unwrap();
            assert!(!brute.edges.is_empty());
            assert_eq!(brute.edges, grid.edges, "{space:?}");
        }
    }

    #[test]
    fn auto_alpha_examples() {
        let s = LatentSpace::UnitDisk;
        let pts = [Point::polar(0.0, 0.0), Point::polar(0.1, 0.0), Point::polar(0.3, 0.0)];
        assert!((auto_alpha(&s, &pts).unwrap() - 0.2 * AUTO_ALPHA_FACTOR).abs() < 1e-15);
        let two = [Point::angle(0.0), Point::angle(1.25)];
        assert!((auto_alpha(&LatentSpace::UnitCircle, &two).unwrap() - 1.25 * AUTO_ALPHA_FACTOR).abs() < 1e-15);
        assert!(auto_alpha(&s, &pts[..1]).is_err());
    }

    #[test]
    fn auto_alpha_in_config_connects_the_graph() {
        let cfg = HubConfig {
            alpha: Alpha::Auto,
            ..HubConfig::new(200, 0.0, 4)
        };
        let g = generate(&LatentSpace::Sphere, &AngularDensity::uniform(), &cfg).unwrap();
        assert_eq!(components(g.n(), &g.edges), 1);
        assert!((g.beta - 3.0 * g.alpha).abs() < 1e-15);
        assert!((g.epsilon - g.alpha / 10.0).abs() < 1e-15);
    }

    #[test]
    fn alpha_parses() {
        assert_eq!("auto".parse::<Alpha>().unwrap(), Alpha::Auto);
        assert_eq!(" 0.5".parse::<Alpha>().unwrap(), Alpha::Fixed(0.5));
        assert!("x".parse::<Alpha>().is_err());
        let j: Alpha = serde_json::from_str("\"auto\"").unwrap();
        assert_eq!(j, Alpha::Auto);
        assert_eq!(serde_json::to_string(&Alpha::Fixed(0.25)).unwrap(), "0.25");
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let s = LatentSpace::UnitCircle;
        let u = AngularDensity::uniform();
        assert!(generate(&s, &u, &HubConfig::new(0, 0.1, 0)).is_err());
        assert!(generate(&s, &u, &HubConfig::new(3, 0.1, 0).with_hubs(4)).is_err());
        assert!(generate(&s, &u, &HubConfig::new(3, -0.1, 0)).is_err());
    }

    fn components(n: usize, edges: &[(usize, usize)]) -> usize {
        let adj = adjacency_lists(n, edges);
        let mut seen = vec![false; n];
        let mut count = 0;
        for s in 0..n {
            if seen[s] {
                continue;
            }
            count += 1;
            let mut stack = vec![s];
            seen[s] = true;
            while let Some(v) = stack.pop() {
                for &w in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        count
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn grid_and_brute_agree_on_random_configs(seed in 0u64..1000, n in 2usize..400, alpha in 0.0..0.6f64, hubs in 0usize..4) {
            let cfg = HubConfig::new(n, alpha, seed).with_hubs(hubs.min(n));
            for space in [LatentSpace::UnitCircle, LatentSpace::UnitDisk] {
                let a = generate_with(&space, &AngularDensity::uniform(), &cfg, EdgeStrategy::BruteForce).unwrap();
                let b = generate_with(&space, &AngularDensity::uniform(), &cfg, EdgeStrategy::Grid).unwrap();
                prop_assert_eq!(&a.edges, &b.edges);
            }
        }

        #[test]
        fn edge_rule_holds(seed in 0u64..1000, alpha in 0.0..PI) {
            let cfg = HubConfig::new(60, alpha, seed).with_hubs(2);
            let s = LatentSpace::UnitCircle;
            let g = generate(&s, &AngularDensity::uniform(), &cfg).unwrap();
            let mut expected = Vec::new();
            for i in 0..g.n() {
                for j in i + 1..g.n() {
                    let d = s.distance(&g.positions[i], &g.positions[j]).unwrap();
                    if d <= g.radius[i].max(g.radius[j]) {
                        expected.push((i, j));
                    }
                }
            }
            prop_assert_eq!(expected, g.edges);
        }
    }
}
