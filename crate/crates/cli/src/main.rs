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

//! `nugg`: generate geometric graphs, build shift operators, run degree,
//! estimation and convergence experiments.
//!
//! Exit codes: 0 success, 1 runtime or numerical failure, 2 usage or
//! validation error.

mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::{Flags, RunConfig};

#[derive(Debug, Parser)]
#[command(
    name = "nugg",
    version,
    about = "Non-uniform geometric graphs and density-corrected shift operators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a graph; writes graph.json, edges.csv and nodes.csv.
    Gen(Flags),
    /// Build a shift operator for a graph; writes the matrix and its spectrum.
    Gso(Flags),
    /// Monte-Carlo comparison with the continuous operator.
    Converge(Flags),
    /// Empirical against expected node degrees.
    Degrees(Flags),
    /// Degree-based density estimates merged into the node table.
    Estimate(Flags),
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            Self::Usage(_) => 2,
            Self::Runtime(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Usage(m) | Self::Runtime(m) => f.write_str(m),
        }
    }
}

impl From<nugg::Error> for CliError {
    fn from(e: nugg::Error) -> Self {
        use nugg::Error as E;
        match e {
            E::Domain(_)
            | E::InvalidParameter(_)
            | E::Unsupported(_)
            | E::DegenerateDensity(_)
            | E::UnknownPreset(_)
            | E::Parse(_)
            | E::Json(_)
            | E::Csv(_) => Self::Usage(e.to_string()),
            E::DegreeSingularity { .. } | E::Numerical(_) | E::Io(_) => Self::Runtime(e.to_string()),
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("NUGG_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Usage(format!("NUGG_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Runtime(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let (name, flags) = match &cli.command {
        Command::Gen(f) => ("gen", f),
        Command::Gso(f) => ("gso", f),
        Command::Converge(f) => ("converge", f),
        Command::Degrees(f) => ("degrees", f),
        Command::Estimate(f) => ("estimate", f),
    };
    let cfg = RunConfig::resolve(name, flags)?;
    let summary = match name {
        "gen" => commands::gen(&cfg)?,
        "gso" => commands::gso(&cfg)?,
        "converge" => commands::converge(&cfg)?,
        "degrees" => commands::degrees(&cfg)?,
        "estimate" => commands::estimate(&cfg)?,
        _ => unreachable!(),
    };
    print!("{summary}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
