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

//! Run configuration: a JSON file is the base, command-line flags override
//! individual fields, and the resolved result is echoed next to the outputs.

use std::path::PathBuf;

use clap::Args;
use nugg::convergence::{RhoMode, TestSignal, DEFAULT_PROBES};
use nugg::density::AngularDensity;
use nugg::estimate::EstimateMethod;
use nugg::geometry::LatentSpace;
use nugg::graphgen::Alpha;
use nugg::gso::GsoSpec;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: String,
    pub space: LatentSpace,
    /// Absent means the graph file's density, or uniform.
    pub density: Option<AngularDensity>,
    pub n: Option<usize>,
    pub n_grid: Vec<usize>,
    /// Absent means `auto` for `gen` and 0.1 for `converge`.
    pub alpha: Option<Alpha>,
    pub beta: Option<f64>,
    pub epsilon: Option<f64>,
    pub hubs: usize,
    pub preset: String,
    /// Explicit modulations; takes precedence over `preset`.
    pub gso: Option<GsoSpec>,
    pub rho: RhoMode,
    pub estimate_method: Option<EstimateMethod>,
    pub seed: u64,
    pub trials: usize,
    pub signal: TestSignal,
    pub p: f64,
    pub probes: usize,
    pub graph: Option<PathBuf>,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: String::new(),
            space: LatentSpace::UnitCircle,
            density: None,
            n: None,
            n_grid: vec![500, 1000, 2000, 4000, 8000],
            alpha: None,
            beta: None,
            epsilon: None,
            hubs: 0,
            preset: "random_walk".into(),
            gso: None,
            rho: RhoMode::True,
            estimate_method: None,
            seed: 0,
            trials: 10,
            signal: TestSignal::CosHarmonic(1),
            p: 0.05,
            probes: DEFAULT_PROBES,
            graph: None,
            out: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Latent space: s1, disk, sphere or hyperbolic.
    #[arg(long)]
    pub space: Option<String>,
    /// Radius of the hyperbolic disk.
    #[arg(long = "R")]
    pub big_r: Option<f64>,
    /// `uniform` or a JSON density object.
    #[arg(long)]
    pub density: Option<String>,
    /// Node count; a comma-separated grid for `converge`.
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    /// Base radius, or `auto` for the connectivity bottleneck.
    #[arg(long)]
    pub alpha: Option<String>,
    /// Hub radius increment.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Hub region radius around each seed.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Number of hub seeds.
    #[arg(long)]
    pub hubs: Option<usize>,
    /// Shift operator preset.
    #[arg(long)]
    pub preset: Option<String>,
    /// Density weights of the operator: true, ignore or estimate.
    #[arg(long)]
    pub rho: Option<String>,
    /// Estimator: degree_only or degree_over_volume.
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Test signal: constant:<k>, cos:<k> or radial:<k>.
    #[arg(long, visible_alias = "u")]
    pub signal: Option<String>,
    /// Failure probability of the sup-error bound.
    #[arg(long)]
    pub p: Option<f64>,
    /// Probe nodes per trial.
    #[arg(long)]
    pub probes: Option<usize>,
    /// Input graph JSON.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_space(name: &str, radius: Option<f64>) -> Result<LatentSpace, CliError> {
    match name {
        "s1" | "circle" => Ok(LatentSpace::UnitCircle),
        "disk" => Ok(LatentSpace::UnitDisk),
        "sphere" => Ok(LatentSpace::Sphere),
        "hyperbolic" => {
            let r = radius.ok_or_else(|| CliError::Usage("--space hyperbolic requires --R".into()))?;
            Ok(LatentSpace::hyperbolic(r)?)
        }
        other => Err(CliError::Usage(format!(
            "unknown space `{other}` (expected s1, disk, sphere or hyperbolic)"
        ))),
    }
}

impl RunConfig {
    pub fn resolve(command: &str, flags: &Flags) -> Result<Self, CliError> {
        let mut cfg = match &flags.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))?
            }
            None => RunConfig::default(),
        };
        cfg.command = command.to_string();
        cfg.apply(flags)?;
        Ok(cfg)
    }

    fn apply(&mut self, f: &Flags) -> Result<(), CliError> {
        match (&f.space, f.big_r) {
            (Some(s), r) => {
                let r = r.or(match self.space {
                    LatentSpace::HyperbolicDisk { radius } => Some(radius),
                    _ => None,
                });
                self.space = parse_space(s, r)?;
            }
            (None, Some(r)) => match self.space {
                LatentSpace::HyperbolicDisk { .. } => self.space = LatentSpace::hyperbolic(r)?,
                _ => return Err(CliError::Usage("--R only applies to --space hyperbolic".into())),
            },
            (None, None) => {}
        }
        if let Some(d) = &f.density {
            self.density = Some(AngularDensity::parse(d)?);
        }
        if let Some(n) = &f.n {
            if n.is_empty() {
                return Err(CliError::Usage("--n needs at least one value".into()));
            }
            self.n = Some(n[0]);
            self.n_grid = n.clone();
        }
        if let Some(a) = &f.alpha {
            self.alpha = Some(a.parse()?);
        }
        if f.beta.is_some() {
            self.beta = f.beta;
        }
        if f.eps.is_some() {
            self.epsilon = f.eps;
        }
        if let Some(h) = f.hubs {
            self.hubs = h;
        }
        if let Some(p) = &f.preset {
            self.preset = p.clone();
            self.gso = None;
        }
        if let Some(r) = &f.rho {
            self.rho = r.parse()?;
        }
        if let Some(m) = &f.method {
            self.estimate_method = Some(serde_json::from_value(serde_json::Value::String(m.clone())).map_err(
                |_| {
                    CliError::Usage(format!(
                        "unknown method `{m}` (expected degree_only or degree_over_volume)"
                    ))
                },
            )?);
        }
        if let Some(s) = f.seed {
            self.seed = s;
        }
        if let Some(t) = f.trials {
            self.trials = t;
        }
        if let Some(s) = &f.signal {
            self.signal = s.parse()?;
        }
        if let Some(p) = f.p {
            self.p = p;
        }
        if let Some(p) = f.probes {
            self.probes = p;
        }
        if f.graph.is_some() {
            self.graph = f.graph.clone();
        }
        if let Some(o) = &f.out {
            self.out = o.clone();
        }
        Ok(())
    }

    pub fn gso_spec(&self) -> Result<GsoSpec, CliError> {
        match &self.gso {
            Some(spec) => Ok(spec.clone()),
            None => Ok(nugg::gso::preset(&self.preset)?),
        }
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        let mut s = serde_json::to_string_pretty(self).map_err(nugg::Error::from)?;
        s.push('\n');
        Ok(s)
    }
}
