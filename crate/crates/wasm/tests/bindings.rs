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

use nugg_wasm::{convergence_values, density_values, sample_graph};
use serde_json::Value;

#[test]
fn payloads_are_deterministic_per_seed() {
    let d = r#"{"type":"sbrv","c":[1.0],"n":[2],"mu":[0.0]}"#;
    let a = sample_graph("sphere", 0.0, d, 600, 0.0, 3, 9).unwrap();
    assert_eq!(a, sample_graph("sphere", 0.0, d, 600, 0.0, 3, 9).unwrap());
    assert_ne!(a, sample_graph("sphere", 0.0, d, 600, 0.0, 3, 10).unwrap());
    let c = convergence_values(d, 0.3, "300,600", 5, "ignore", 2).unwrap();
    assert_eq!(c, convergence_values(d, 0.3, "300,600", 5, "ignore", 2).unwrap());
}

#[test]
fn estimated_density_is_reported_per_node() {
    let v: Value = serde_json::from_str(&sample_graph("s1", 0.0, "uniform", 2000, 0.1, 0, 4).unwrap()).unwrap();
    let rho_hat: Vec<f64> = v["rho_hat"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    assert_eq!(rho_hat.len(), 2000);
    let mean = rho_hat.iter().sum::<f64>() / 2000.0;
    assert!((mean - 1.0).abs() < 0.05, "{mean}");
    assert!(density_values("uniform", 1).is_ok());
}
