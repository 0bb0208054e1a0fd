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

//! End-to-end checks across modules: sampling, serialization, operators,
//! estimation and the convergence harness.

use nugg::convergence::{continuous_apply, run_convergence, ConvergenceConfig, RhoMode, TestSignal};
use nugg::density::AngularDensity;
use nugg::estimate::{estimate_density, true_volumes};
use nugg::geometry::LatentSpace;
use nugg::graphgen::{generate, generate_with, Alpha, EdgeStrategy, HubConfig};
use nugg::gso::{adjacency_matrix, build_gso, preset, SparseGso};
use nugg::io::{edges_csv, graph_from_json, graph_to_json, nodes_csv, read_edges_csv, read_nodes_csv};
use nugg::neighborhood::RadiusField;

fn bumpy() -> AngularDensity {
    AngularDensity::parse(r#"{"type":"sbrv","c":[1.0,1.0],"n":[0,1],"mu":[0.0,0.5]}"#).unwrap()
}

fn spaces() -> Vec<LatentSpace> {
    vec![
        LatentSpace::UnitCircle,
        LatentSpace::UnitDisk,
        LatentSpace::Sphere,
        LatentSpace::hyperbolic(5.0).unwrap(),
    ]
}

#[test]
fn edge_strategies_agree_on_every_space() {
    for space in spaces() {
        let alpha = if matches!(space, LatentSpace::HyperbolicDisk { .. }) {
            3.0
        } else {
            0.15
        };
        let cfg = HubConfig::new(1500, alpha, 7).with_hubs(3);
        let brute = generate_with(&space, &bumpy(), &cfg, EdgeStrategy::BruteForce).unwrap();
        let grid = generate_with(&space, &bumpy(), &cfg, EdgeStrategy::Grid).unwrap();
        assert_eq!(brute, grid, "{space:?}");
    }
}

#[test]
fn files_round_trip() {
    for space in spaces() {
        let cfg = HubConfig {
            alpha: Alpha::Auto,
            ..HubConfig::new(400, 1.0, 3).with_hubs(2)
        };
        let g = generate(&space, &bumpy(), &cfg).unwrap();
        assert_eq!(graph_from_json(&graph_to_json(&g).unwrap()).unwrap(), g);
        assert_eq!(read_edges_csv(&edges_csv(&g.edges).unwrap()).unwrap(), g.edges);
        let rows = read_nodes_csv(&nodes_csv(&g, &[]).unwrap()).unwrap();
        assert_eq!(rows.len(), g.n());
        for (row, (p, rho)) in rows.iter().zip(g.positions.iter().zip(&g.rho_true)) {
            assert_eq!(row.theta, p.theta);
            assert_eq!(row.rho, *rho);
        }
    }
}

#[test]
fn sparse_and_dense_operators_match_on_sampled_graphs() {
    let g = generate(
        &LatentSpace::UnitDisk,
        &bumpy(),
        &HubConfig::new(300, 0.2, 9).with_hubs(2),
    )
    .unwrap();
    let a = adjacency_matrix(g.n(), &g.edges);
    for name in ["random_walk", "sqrt_normalized", "sym_normalized_laplacian", "signless"] {
        let spec = preset(name).unwrap();
        let dense = build_gso(&a, &g.rho_true, &spec).unwrap();
        let sparse = SparseGso::build(g.n(), &g.edges, &g.rho_true, &spec)
            .unwrap()
            .to_dense();
        assert!((dense - sparse).amax() < 1e-14, "{name}");
    }
}

#[test]
fn estimated_density_tracks_the_truth() {
    let g = generate(&LatentSpace::UnitCircle, &bumpy(), &HubConfig::new(8000, 0.05, 4)).unwrap();
    let vol = true_volumes(&g).unwrap();
    let est = estimate_density(&g, Some(&vol)).unwrap();
    assert!(est.undefined.is_empty());
    assert!(est.relative_l2_error(&g.rho_true).unwrap() < 0.15);
}

#[test]
fn operator_applied_to_a_signal_approaches_the_continuum() {
    let space = LatentSpace::UnitCircle;
    let spec = preset("random_walk").unwrap();
    let u = TestSignal::CosHarmonic(1);
    // The continuum value is O(alpha^2) and the sampling noise O(alpha / sqrt(degree)),
    // so alpha must be large enough for the first to dominate. The error is
    // noise-limited and falls like N^(-1/2).
    let rel = |n: usize| {
        let g = generate(&space, &bumpy(), &HubConfig::new(n, 0.3, 12)).unwrap();
        let op = SparseGso::build(g.n(), &g.edges, &g.rho_true, &spec).unwrap();
        let values: Vec<f64> = g.positions.iter().map(|p| u.eval(p)).collect();
        let lu = op.apply(&values);
        let field = RadiusField::from_graph(&g);
        let (mut sq_err, mut sq_val) = (0.0, 0.0);
        for (i, p) in g.positions.iter().enumerate().step_by(n / 100) {
            let want = continuous_apply(&space, &field, &spec, &u, p).unwrap();
            sq_err += (lu[i] - want).powi(2);
            sq_val += want * want;
        }
        (sq_err / sq_val).sqrt()
    };
    let (coarse, fine) = (rel(2500), rel(20_000));
    assert!(
        fine < 0.5 * coarse && fine < 0.3,
        "relative rms error {coarse} -> {fine}"
    );
}

#[test]
fn density_correction_pays_off_on_the_circle() {
    let mut cfg = ConvergenceConfig::circle(preset("random_walk").unwrap(), 0.2, vec![1000, 4000], 5, 17);
    cfg.density = bumpy();
    let corrected = run_convergence(&cfg).unwrap();
    cfg.rho = RhoMode::Ignore;
    let ignored = run_convergence(&cfg).unwrap();
    assert!(corrected.mse[1] < corrected.mse[0]);
    assert!(corrected.mse[1] < ignored.mse[1]);
}
