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

use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

use nugg::io::{graph_from_json, read_edges_csv, read_nodes_csv};
use serde_json::Value;

fn nugg(args: &[&str]) -> Output {
    nugg_env(args, &[])
}

fn nugg_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_nugg"));
    cmd.args(args).env_remove("NUGG_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn ok(args: &[&str]) -> Value {
    let out = nugg(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("summary is JSON")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_is_byte_identical_on_rerun_and_from_the_echoed_config() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, c) = (tmp.path().join("a"), tmp.path().join("c"));
    let args = [
        "gen",
        "--space",
        "s1",
        "--density",
        "uniform",
        "--n",
        "1000",
        "--alpha",
        "0.02",
        "--seed",
        "7",
    ];
    let run = |dir: &Path| {
        let mut v = args.to_vec();
        v.extend(["--out", path(dir)]);
        nugg(&v)
    };
    let oa = run(&a);
    let first = files(&a);
    let ob = run(&a);
    assert_eq!(oa.stdout, ob.stdout);
    assert_eq!(first, files(&a));
    let cfg = a.join("gen_config.json");
    let oc = nugg(&["gen", "--config", path(&cfg), "--out", path(&c)]);
    assert_eq!(oc.stdout, oa.stdout);
    let (fa, mut fc) = (files(&a), files(&c));
    // the echoed config differs only in its output directory
    fc.remove("gen_config.json");
    assert!(fc.iter().all(|(k, v)| fa[k] == *v));
}

#[test]
fn gen_outputs_parse_back() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path();
    let density = r#"{"type":"sbrv","c":[1.0,0.5],"n":[0,2],"mu":[0.0,1.0]}"#;
    ok(&[
        "gen",
        "--space",
        "disk",
        "--density",
        density,
        "--n",
        "400",
        "--alpha",
        "0.15",
        "--hubs",
        "2",
        "--seed",
        "3",
        "--out",
        path(out),
    ]);
    let g = graph_from_json(&std::fs::read_to_string(out.join("graph.json")).unwrap()).unwrap();
    assert_eq!(
        read_edges_csv(&std::fs::read_to_string(out.join("edges.csv")).unwrap()).unwrap(),
        g.edges
    );
    let rows = read_nodes_csv(&std::fs::read_to_string(out.join("nodes.csv")).unwrap()).unwrap();
    let deg = g.degrees();
    assert_eq!(rows.len(), 400);
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(
            (r.theta, r.r, r.hub, r.degree),
            (g.positions[i].theta, Some(g.positions[i].r), g.is_hub[i], deg[i])
        );
    }
    let graph: Value = serde_json::from_str(&std::fs::read_to_string(out.join("graph.json")).unwrap()).unwrap();
    assert_eq!(graph["density"]["type"], "sbrv");
}

#[test]
fn usage_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = path(tmp.path());
    assert_eq!(code(&nugg(&["gen", "--space", "s1", "--out", out])), 2);
    assert_eq!(code(&nugg(&["gen", "--n", "10", "--space", "torus", "--out", out])), 2);
    assert_eq!(code(&nugg(&["gen", "--n", "10", "--density", "{bad", "--out", out])), 2);
    assert_eq!(code(&nugg(&["frobnicate"])), 2);
    assert_eq!(
        code(&nugg(&["degrees", "--graph", "/nonexistent/graph.json", "--out", out])),
        2
    );
    assert_eq!(code(&nugg(&["gso", "--out", out])), 2);
    ok(&["gen", "--n", "50", "--seed", "1", "--out", out]);
    let graph = tmp.path().join("graph.json");
    assert_eq!(
        code(&nugg(&[
            "gso",
            "--graph",
            path(&graph),
            "--preset",
            "laplace",
            "--out",
            out
        ])),
        2
    );
    assert_eq!(
        code(&nugg_env(
            &["gen", "--n", "10", "--out", out],
            &[("NUGG_THREADS", "zero")]
        )),
        2
    );
}

#[test]
fn isolated_nodes_surface_the_singular_node() {
    let tmp = tempfile::tempdir().unwrap();
    let out = path(tmp.path());
    ok(&["gen", "--n", "50", "--alpha", "0.001", "--seed", "1", "--out", out]);
    let graph = tmp.path().join("graph.json");
    let r = nugg(&["gso", "--graph", path(&graph), "--preset", "random_walk", "--out", out]);
    assert_eq!(code(&r), 1);
    assert!(String::from_utf8_lossy(&r.stderr).contains("degree singularity at node"));
}

#[test]
fn gso_summary_and_matrices() {
    let tmp = tempfile::tempdir().unwrap();
    let out = path(tmp.path());
    let density = r#"{"type":"sbrv","c":[1.0,1.0],"n":[0,1],"mu":[0.0,0.0]}"#;
    ok(&[
        "gen",
        "--density",
        density,
        "--n",
        "300",
        "--alpha",
        "auto",
        "--seed",
        "2",
        "--out",
        out,
    ]);
    let graph = tmp.path().join("graph.json");
    let s = ok(&[
        "gso",
        "--graph",
        path(&graph),
        "--preset",
        "sqrt_normalized",
        "--rho",
        "ignore",
        "--out",
        out,
    ]);
    assert_eq!(s["symmetric"], true);
    assert_eq!(s["within_two_sqrt_n"], true);
    assert!(s["max_eigenvalue"].as_f64().unwrap() <= 1e-10);

    ok(&[
        "gso",
        "--graph",
        path(&graph),
        "--preset",
        "random_walk",
        "--rho",
        "true",
        "--out",
        out,
    ]);
    let dense: Vec<Vec<f64>> = std::fs::read_to_string(tmp.path().join("gso.csv"))
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    for (i, row) in dense.iter().enumerate() {
        let off: f64 = row.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| v).sum();
        assert!((off + row[i]).abs() < 1e-12, "row {i}");
    }
    let triplets = std::fs::read_to_string(tmp.path().join("gso_triplets.csv")).unwrap();
    let mut lines = triplets.lines();
    assert_eq!(lines.next(), Some("row,col,value"));
    for l in lines {
        let f: Vec<&str> = l.split(',').collect();
        let (i, j, v): (usize, usize, f64) = (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].parse().unwrap());
        assert_eq!(dense[i][j], v);
    }
}

#[test]
fn converge_constant_signal_and_density_correction() {
    let tmp = tempfile::tempdir().unwrap();
    let out = path(tmp.path());
    let s = ok(&[
        "converge",
        "--n",
        "300,600",
        "--trials",
        "5",
        "--alpha",
        "0.3",
        "--u",
        "constant:1",
        "--out",
        out,
    ]);
    assert!(s["mse"]
        .as_array()
        .unwrap()
        .iter()
        .all(|m| m.as_f64().unwrap() <= 1e-20));
    let csv = std::fs::read_to_string(tmp.path().join("convergence.csv")).unwrap();
    assert!(csv.starts_with("N,trial,mse,sup_err\n"));
    assert_eq!(csv.lines().count(), 11);

    let density = r#"{"type":"sbrv","c":[1.0],"n":[1],"mu":[0.0]}"#;
    let base = [
        "converge",
        "--density",
        density,
        "--n",
        "2000",
        "--trials",
        "5",
        "--alpha",
        "0.3",
        "--seed",
        "4",
        "--out",
        out,
    ];
    let mse = |rho: &str| {
        let mut a = base.to_vec();
        a.extend(["--rho", rho]);
        ok(&a)["mse"][0].as_f64().unwrap()
    };
    let (corrected, ignored) = (mse("true"), mse("ignore"));
    assert!(corrected < ignored, "{corrected} vs {ignored}");
}

#[test]
fn thread_count_does_not_change_results() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |dir: &str, threads: &str| {
        let out = tmp.path().join(dir);
        let r = nugg_env(
            &[
                "converge",
                "--n",
                "200,400",
                "--trials",
                "5",
                "--alpha",
                "0.2",
                "--out",
                path(&out),
            ],
            &[("NUGG_THREADS", threads)],
        );
        assert!(r.status.success());
        std::fs::read(out.join("convergence.json")).unwrap()
    };
    assert_eq!(run("one", "1"), run("four", "4"));
}

#[test]
fn estimate_on_a_uniform_graph_is_near_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = path(tmp.path());
    ok(&["gen", "--n", "10000", "--alpha", "0.02", "--seed", "11", "--out", out]);
    let graph = tmp.path().join("graph.json");
    let s = ok(&["estimate", "--graph", path(&graph), "--out", out]);
    assert_eq!(s["method"], "degree_over_volume");
    assert!((s["median_rho_hat"].as_f64().unwrap() - 1.0).abs() < 0.05);
    let rows = read_nodes_csv(&std::fs::read_to_string(tmp.path().join("nodes.csv")).unwrap()).unwrap();
    assert!(rows.iter().filter(|r| r.degree > 0).all(|r| r.rho_hat.is_some()));
    let s = ok(&[
        "estimate",
        "--graph",
        path(&graph),
        "--method",
        "degree_only",
        "--out",
        out,
    ]);
    assert_eq!(s["method"], "degree_only");
}

#[test]
fn degrees_correlate_on_a_non_uniform_circle() {
    let tmp = tempfile::tempdir().unwrap();
    let out = path(tmp.path());
    let density = r#"{"type":"sbrv","c":[1.0],"n":[1],"mu":[0.0]}"#;
    ok(&[
        "gen",
        "--density",
        density,
        "--n",
        "3000",
        "--alpha",
        "0.05",
        "--seed",
        "5",
        "--out",
        out,
    ]);
    let graph = tmp.path().join("graph.json");
    let s = ok(&["degrees", "--graph", path(&graph), "--out", out]);
    assert!(s["pearson_expected_empirical"].as_f64().unwrap() > 0.8);
    let text = std::fs::read_to_string(tmp.path().join("degrees.csv")).unwrap();
    assert!(text.starts_with("id,theta,r,rho,hub,radius,degree,expected_degree,rho_hat\n"));
}

#[test]
fn hyperbolic_mean_degree_matches_the_formula() {
    let tmp = tempfile::tempdir().unwrap();
    let runs: Vec<(f64, f64)> = (0..5)
        .map(|seed| {
            let out = tmp.path().join(seed.to_string());
            let s = ok(&[
                "gen",
                "--space",
                "hyperbolic",
                "--R",
                "12",
                "--alpha",
                "12",
                "--n",
                "10000",
                "--seed",
                &seed.to_string(),
                "--out",
                path(&out),
            ]);
            (
                s["mean_degree"].as_f64().unwrap(),
                s["expected_mean_degree"].as_f64().unwrap(),
            )
        })
        .collect();
    let m: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let mean = m.iter().sum::<f64>() / 5.0;
    let sd = (m.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 4.0).sqrt();
    let formula = runs[0].1;
    assert!(
        (mean - formula).abs() <= 3.0 * sd / 5f64.sqrt(),
        "mean {mean} sd {sd} formula {formula}"
    );
}
