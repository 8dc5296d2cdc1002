// Copyright 2026 The rydgate Authors
// SPDX-License-Identifier: Apache-2.0

//! Run configuration: command-line flags over a JSON file over defaults.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::Args;
use rydgate::fidelity::{FidelityDefinition, Grid};
use serde::{Deserialize, Serialize};

/// Flags shared by every command. Unset flags fall back to the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// JSON config file; its keys match the long flag names with `_` for `-`.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overlap factor b^2. Repeat or comma-separate for several values.
    #[arg(long, value_delimiter = ',')]
    pub b2: Option<Vec<f64>>,
    /// Spectator factor c^2 (three qubits).
    #[arg(long)]
    pub c2: Option<f64>,
    #[arg(long, value_parser = clap::value_parser!(u8).range(2..=3))]
    pub qubits: Option<u8>,
    /// Pulse count M.
    #[arg(long)]
    pub pulses: Option<usize>,
    /// Scan axis `lo:hi:step` in units of pi.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// trace-sq | trace | average
    #[arg(long)]
    pub fidelity: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; 1 runs everything on the calling thread.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Use `(b, a)` instead of `(-b, a)` for even pulses.
    #[arg(long)]
    pub non_orthogonal: bool,
}

/// Keys accepted in the config file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub b2: Option<Vec<f64>>,
    pub c2: Option<f64>,
    pub qubits: Option<u8>,
    pub pulses: Option<usize>,
    pub grid: Option<String>,
    pub fidelity: Option<String>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub non_orthogonal: Option<bool>,
    pub threshold: Option<f64>,
    pub restarts: Option<usize>,
    pub max_evaluations: Option<usize>,
    pub search: Option<String>,
    pub min_sq: Option<f64>,
    pub count: Option<usize>,
    pub tolerance: Option<f64>,
    pub areas: Option<Vec<[f64; 2]>>,
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

/// Fully resolved settings, echoed into every output's metadata.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolved {
    pub command: String,
    pub b2: Vec<f64>,
    pub c2: f64,
    pub qubits: usize,
    pub pulses: usize,
    /// `[lo, hi, step]` in units of pi.
    pub grid: [f64; 3],
    pub fidelity: FidelityDefinition,
    pub seed: u64,
    pub out: PathBuf,
    pub threads: Option<usize>,
    pub non_orthogonal: bool,
}

pub fn parse_grid(text: &str) -> anyhow::Result<[f64; 3]> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        bail!("grid must be lo:hi:step, got {text:?}");
    }
    let mut v = [0.0; 3];
    for (slot, p) in v.iter_mut().zip(&parts) {
        *slot = p
            .trim()
            .parse()
            .with_context(|| format!("bad number {p:?} in grid"))?;
    }
    Grid::in_pi(v[0], v[1], v[2])?;
    Ok(v)
}

pub fn parse_fidelity(text: &str) -> anyhow::Result<FidelityDefinition> {
    FidelityDefinition::parse(text)
        .with_context(|| format!("unknown fidelity {text:?}; expected trace-sq, trace or average"))
}

/// Command-specific defaults.
pub struct Defaults {
    pub b2: Vec<f64>,
    pub grid: &'static str,
    pub pulses: usize,
    pub qubits: u8,
    pub c2: f64,
}

impl Defaults {
    pub fn new(b2: &[f64], grid: &'static str, pulses: usize) -> Self {
        Self {
            b2: b2.to_vec(),
            grid,
            pulses,
            qubits: 2,
            c2: 0.0,
        }
    }
}

impl CommonArgs {
    pub fn resolve(
        &self,
        command: &str,
        defaults: Defaults,
    ) -> anyhow::Result<(Resolved, FileConfig)> {
        let file = match &self.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let grid_text = self
            .grid
            .clone()
            .or_else(|| file.grid.clone())
            .unwrap_or_else(|| defaults.grid.into());
        let fidelity_text = self
            .fidelity
            .clone()
            .or_else(|| file.fidelity.clone())
            .unwrap_or_else(|| "trace-sq".into());
        let resolved = Resolved {
            command: command.into(),
            b2: self
                .b2
                .clone()
                .or_else(|| file.b2.clone())
                .unwrap_or(defaults.b2),
            c2: self.c2.or(file.c2).unwrap_or(defaults.c2),
            qubits: self.qubits.or(file.qubits).unwrap_or(defaults.qubits) as usize,
            pulses: self.pulses.or(file.pulses).unwrap_or(defaults.pulses),
            grid: parse_grid(&grid_text)?,
            fidelity: parse_fidelity(&fidelity_text)?,
            seed: self.seed.or(file.seed).unwrap_or(0),
            out: self
                .out
                .clone()
                .or_else(|| file.out.clone())
                .unwrap_or_else(|| PathBuf::from("out")),
            threads: self.threads.or(file.threads),
            non_orthogonal: self.non_orthogonal || file.non_orthogonal.unwrap_or(false),
        };
        if resolved.b2.is_empty() {
            bail!("at least one b2 value is required");
        }
        for &b2 in &resolved.b2 {
            if !(0.0..=1.0).contains(&b2) {
                bail!("b2 = {b2} outside [0, 1]");
            }
        }
        if !(0.0..=1.0).contains(&resolved.c2) {
            bail!("c2 = {} outside [0, 1]", resolved.c2);
        }
        if resolved.qubits == 2 && resolved.c2 != 0.0 {
            bail!("c2 needs --qubits 3");
        }
        if resolved.threads == Some(0) {
            bail!("threads must be at least 1");
        }
        Ok((resolved, file))
    }
}

impl Resolved {
    pub fn grid(&self) -> Grid {
        let [lo, hi, step] = self.grid;
        Grid::in_pi(lo, hi, step).expect("validated at resolve")
    }

    pub fn execution(&self) -> rydgate::Execution {
        if self.threads == Some(1) {
            rydgate::Execution::Sequential
        } else {
            rydgate::Execution::Parallel
        }
    }
}
