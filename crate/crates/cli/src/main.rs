// Copyright 2026 The rydgate Authors
// SPDX-License-Identifier: Apache-2.0

//! `rydgate`: fidelity maps, scans, optimized maps and oracle validation as
//! CSV and JSON files.
//!
//! Exit codes: 0 success, 2 invalid configuration, 3 validation failure,
//! 1 anything else (I/O).

mod config;
mod output;

use std::f64::consts::PI;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use rydgate::fidelity::{
    b_scan, fidelity_map, format_sig, lattice_analysis, quartic_slope, robustness_scan, FidelityMap,
};
use rydgate::model::{build_sop_protocol, Protocol, ProtocolFamily, Pulse, StructuralVector};
use rydgate::optimize::{optimized_map, FactorSearch, NelderMeadSettings};
use rydgate::oracle::{validate_protocol, EnvelopeShape, OracleSettings, ValidationReport};
use rydgate::propagator::esop_closed_form_check;

use config::{CommonArgs, Defaults, FileConfig, Resolved};
use output::{write_atomic, write_json, FileDigest, LatticeOut};

#[derive(Debug, Parser)]
#[command(
    name = "rydgate",
    version,
    about = "Blockaded Rydberg C-PHASE gate experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fidelity over (A_odd, A_even) and the lattice of its maxima.
    Map(MapArgs),
    /// Final amplitudes against a common area error.
    Robustness(RobustnessArgs),
    /// Fidelity against b^2 at fixed areas, SOP and non-orthogonal.
    Bscan(BscanArgs),
    /// Three-qubit map with geometrical factors optimized per cell.
    Optimize(OptimizeArgs),
    /// Fidelity map of an M-pulse extended sequence.
    EsopMap(MapArgs),
    /// Time-domain integration against the analytic propagators.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
struct MapArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Lowest fidelity of a reported lattice maximum.
    #[arg(long)]
    threshold: Option<f64>,
}

#[derive(Debug, Args)]
struct RobustnessArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Args)]
struct BscanArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Area pair `A_odd,A_even` in units of pi; repeatable.
    #[arg(long = "areas", allow_hyphen_values = true)]
    areas: Vec<String>,
}

#[derive(Debug, Args)]
struct OptimizeArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// third-qubit | all-factors
    #[arg(long)]
    search: Option<String>,
    /// Lower bound on every optimized squared factor.
    #[arg(long)]
    min_sq: Option<f64>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    max_evaluations: Option<usize>,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Protocol JSON file; when absent, random protocols are drawn.
    #[arg(long)]
    protocol: Option<std::path::PathBuf>,
    /// Number of random protocols.
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    tolerance: Option<f64>,
}

/// Failure classes that map to exit codes.
enum Failure {
    Config(anyhow::Error),
    Validation(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

type Outcome = Result<(), Failure>;

fn config_err(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Config(e.into())
}

#[derive(Serialize)]
struct Metadata<'a, T: Serialize> {
    config: &'a Resolved,
    outputs: Vec<FileDigest>,
    #[serde(flatten)]
    extra: T,
}

fn write_meta<T: Serialize>(
    cfg: &Resolved,
    name: &str,
    outputs: Vec<FileDigest>,
    extra: T,
) -> anyhow::Result<()> {
    write_json(
        &cfg.out,
        name,
        &Metadata {
            config: cfg,
            outputs,
            extra,
        },
    )?;
    Ok(())
}

fn csv_bytes(map: &FidelityMap) -> Vec<u8> {
    let mut buf = Vec::new();
    map.write_csv(&mut buf).expect("writing to memory");
    buf
}

fn b2_tag(b2: f64) -> String {
    format!("b2_{}", format_sig(b2, 6))
}

fn family_for(cfg: &Resolved, b2: f64) -> Result<ProtocolFamily, Failure> {
    let family = ProtocolFamily {
        n_qubits: cfg.qubits,
        pulses: cfg.pulses,
        b2,
        c2: cfg.c2,
        orthogonal: !cfg.non_orthogonal,
    };
    family.validate().map_err(config_err)?;
    Ok(family)
}

fn run_map(args: MapArgs, command: &str, default_pulses: usize) -> Outcome {
    let (cfg, file) = args
        .common
        .resolve(command, Defaults::new(&[0.1], "-8:8:0.05", default_pulses))
        .map_err(config_err)?;
    let threshold = args.threshold.or(file.threshold).unwrap_or(0.7);
    if command == "esop-map" && cfg.qubits != 2 {
        return Err(config_err(anyhow!("esop-map is defined for two qubits")));
    }
    let grid = cfg.grid();
    let mut outputs = Vec::new();
    let mut lattices = Vec::new();
    for &b2 in &cfg.b2 {
        let family = family_for(&cfg, b2)?;
        let map = fidelity_map(&family, &grid, &grid, cfg.fidelity, cfg.execution())
            .map_err(|e| anyhow!(e))?;
        let name = format!("{command}_{}.csv", b2_tag(b2));
        let sha256 = write_atomic(&cfg.out, &name, &csv_bytes(&map))?;
        outputs.push(FileDigest { file: name, sha256 });
        let (ao, ae, f) = map.max_cell();
        let lattice = lattice_analysis(&map, threshold);
        lattices.push(serde_json::json!({
            "b2": b2,
            "max_cell": {"a_odd_over_pi": ao / PI, "a_even_over_pi": ae / PI, "fidelity": f},
            "lattice": lattice.as_ref().ok().map(|r| LatticeOut::new(r, threshold)),
            "lattice_error": lattice.as_ref().err().map(|e| e.to_string()),
            "closed_form_check": esop_check(&family),
        }));
    }
    write_meta(
        &cfg,
        &format!("{command}.json"),
        outputs,
        serde_json::json!({ "maps": lattices }),
    )?;
    Ok(())
}

/// Printed-versus-exact comparison on a coarse angle grid (two qubits only).
fn esop_check(family: &ProtocolFamily) -> Option<serde_json::Value> {
    if family.n_qubits != 2 || !family.orthogonal || family.pulses > 5 {
        return None;
    }
    let (odd, _) = family.vectors().ok()?;
    let mut worst: f64 = 0.0;
    for i in 0..=20 {
        for j in 0..=20 {
            let c = esop_closed_form_check(
                family.pulses,
                &odd,
                i as f64 * 0.1 * PI,
                j as f64 * 0.1 * PI,
            )
            .ok()?;
            worst = worst.max(c.discrepancy());
        }
    }
    Some(serde_json::json!({"pulses": family.pulses, "max_discrepancy": worst}))
}

fn run_robustness(args: RobustnessArgs) -> Outcome {
    let (cfg, _) = args
        .common
        .resolve(
            "robustness",
            Defaults::new(&[0.0, 0.1, 0.5], "-1:1:0.01", 3),
        )
        .map_err(config_err)?;
    if cfg.qubits != 2 || cfg.pulses != 3 {
        return Err(config_err(anyhow!(
            "robustness scans use the two-qubit three-pulse protocol"
        )));
    }
    let deltas: Vec<f64> = cfg.grid().points();
    let log_deltas: Vec<f64> = (0..=40)
        .map(|k| 10f64.powf(-3.0 + 2.0 * k as f64 / 40.0))
        .collect();
    let mut outputs = Vec::new();
    let mut slopes = Vec::new();
    for &b2 in &cfg.b2 {
        let p = build_sop_protocol(b2.sqrt(), [PI, 2.0 * PI, PI]).map_err(config_err)?;
        let scan = robustness_scan(&p, &deltas).map_err(|e| anyhow!(e))?;
        let mut text = String::from("delta_over_pi");
        for c in &scan.curves {
            text.push_str(&format!(",u_{}", c.state));
        }
        text.push('\n');
        for (k, d) in scan.delta.iter().enumerate() {
            text.push_str(&format_sig(d / PI, 9));
            for c in &scan.curves {
                text.push(',');
                text.push_str(&format_sig(c.amplitude[k], 9));
            }
            text.push('\n');
        }
        let name = format!("robustness_{}.csv", b2_tag(b2));
        let sha256 = write_atomic(&cfg.out, &name, text.as_bytes())?;
        outputs.push(FileDigest { file: name, sha256 });
        let slope = quartic_slope(b2.sqrt(), &log_deltas).map_err(|e| anyhow!(e))?;
        slopes.push(serde_json::json!({"b2": b2, "quartic_slope": slope}));
    }
    write_meta(
        &cfg,
        "robustness.json",
        outputs,
        serde_json::json!({ "slopes": slopes }),
    )?;
    Ok(())
}

fn parse_pair(text: &str) -> anyhow::Result<[f64; 2]> {
    let (a, b) = text
        .trim_matches(|c| c == '(' || c == ')')
        .split_once(',')
        .with_context(|| format!("area pair must be A_odd,A_even, got {text:?}"))?;
    Ok([a.trim().parse()?, b.trim().parse()?])
}

fn run_bscan(args: BscanArgs) -> Outcome {
    let (cfg, file) = args
        .common
        .resolve("bscan", Defaults::new(&[0.0], "0:0.5:0.01", 3))
        .map_err(config_err)?;
    let pairs: Vec<[f64; 2]> = if !args.areas.is_empty() {
        args.areas
            .iter()
            .map(|s| parse_pair(s))
            .collect::<anyhow::Result<_>>()
            .map_err(config_err)?
    } else {
        file.areas
            .clone()
            .unwrap_or_else(|| vec![[2.0, 2.0], [2.0, 6.0], [8.0, 6.0], [-6.1, 0.9], [14.0, 0.0]])
    };
    // the b^2 axis is the grid, read in plain units
    let [lo, hi, step] = cfg.grid;
    let b2_grid = rydgate::Grid::new(lo, hi, step)
        .map_err(config_err)?
        .points();
    if b2_grid.iter().any(|b| !(0.0..=1.0).contains(b)) {
        return Err(config_err(anyhow!("b2 grid must lie in [0, 1]")));
    }
    let mut text = String::from("a_odd_over_pi,a_even_over_pi,orthogonal,b2,fidelity\n");
    for [ao, ae] in &pairs {
        for orthogonal in [true, false] {
            let s = b_scan((ao * PI, ae * PI), &b2_grid, orthogonal, cfg.fidelity)
                .map_err(|e| anyhow!(e))?;
            for (b2, f) in s.b2.iter().zip(&s.fidelity) {
                text.push_str(&format!(
                    "{},{},{},{},{}\n",
                    format_sig(*ao, 9),
                    format_sig(*ae, 9),
                    orthogonal,
                    format_sig(*b2, 9),
                    format_sig(*f, 9)
                ));
            }
        }
    }
    let sha256 = write_atomic(&cfg.out, "bscan.csv", text.as_bytes())?;
    write_meta(
        &cfg,
        "bscan.json",
        vec![FileDigest {
            file: "bscan.csv".into(),
            sha256,
        }],
        serde_json::json!({ "areas_over_pi": pairs }),
    )?;
    Ok(())
}

fn run_optimize(args: OptimizeArgs) -> Outcome {
    let defaults = Defaults {
        qubits: 3,
        c2: 0.1,
        ..Defaults::new(&[0.1], "-4:4:0.25", 3)
    };
    let (cfg, file) = args
        .common
        .resolve("optimize", defaults)
        .map_err(config_err)?;
    if cfg.qubits != 3 || cfg.pulses != 3 {
        return Err(config_err(anyhow!(
            "optimize works on the three-qubit three-pulse protocol"
        )));
    }
    let search = args
        .search
        .or(file.search)
        .unwrap_or_else(|| "all-factors".into());
    let min_sq = args.min_sq.or(file.min_sq).unwrap_or(0.1);
    let c2 = cfg.c2;
    let settings = NelderMeadSettings {
        restarts: args.restarts.or(file.restarts).unwrap_or(16),
        max_evaluations: args
            .max_evaluations
            .or(file.max_evaluations)
            .unwrap_or(2000),
        execution: cfg.execution(),
        ..Default::default()
    };
    let grid = cfg.grid();
    let mut outputs = Vec::new();
    let mut summary = Vec::new();
    let b2_values: Vec<f64> = if search == "all-factors" {
        vec![cfg.b2[0]]
    } else {
        cfg.b2.clone()
    };
    for b2 in b2_values {
        let kind = match search.as_str() {
            "third-qubit" => FactorSearch::ThirdQubit {
                b: b2.sqrt(),
                min_sq,
            },
            "all-factors" => FactorSearch::AllFactors {
                c: c2.sqrt(),
                min_sq,
            },
            other => {
                return Err(config_err(anyhow!(
                    "unknown search {other:?}; expected third-qubit or all-factors"
                )))
            }
        };
        let map =
            optimized_map(kind, &grid, &grid, cfg.fidelity, cfg.seed, &settings).map_err(|e| {
                match e {
                    rydgate::Error::InfeasibleStart(_) => config_err(e),
                    e => Failure::Runtime(anyhow!(e)),
                }
            })?;
        let name = match kind {
            FactorSearch::ThirdQubit { .. } => format!("optimize_third_qubit_{}.csv", b2_tag(b2)),
            FactorSearch::AllFactors { .. } => {
                format!("optimize_all_factors_c2_{}.csv", format_sig(c2, 6))
            }
        };
        let sha256 = write_atomic(&cfg.out, &name, &csv_bytes(&map))?;
        outputs.push(FileDigest { file: name, sha256 });
        let (ao, ae, f) = map.max_cell();
        summary.push(serde_json::json!({
            "search": kind,
            "note": map.meta.optimization,
            "max_cell": {"a_odd_over_pi": ao / PI, "a_even_over_pi": ae / PI, "fidelity": f},
        }));
    }
    write_meta(
        &cfg,
        "optimize.json",
        outputs,
        serde_json::json!({ "settings": settings, "maps": summary }),
    )?;
    Ok(())
}

fn random_protocol(rng: &mut ChaCha8Rng, n_qubits: usize, max_pulses: usize) -> Protocol {
    let m = rng.random_range(1..=max_pulses);
    let pulses = (0..m)
        .map(|_| loop {
            let comps: Vec<f64> = (0..n_qubits).map(|_| rng.random_range(-1.0..1.0)).collect();
            if let Ok(v) = StructuralVector::new(&comps) {
                break Pulse::new(rng.random_range(-8.0..8.0) * PI, v);
            }
        })
        .collect();
    Protocol::new(n_qubits, pulses).expect("valid random protocol")
}

#[derive(Serialize)]
struct ValidationSummary {
    tolerance: f64,
    protocols: usize,
    failures: usize,
    max_deviation: f64,
    shape_agreement: f64,
    reports: Vec<ValidationReport>,
}

fn run_validate(args: ValidateArgs) -> Outcome {
    let (cfg, file) = args
        .common
        .resolve("validate", Defaults::new(&[0.1], "-8:8:0.05", 5))
        .map_err(config_err)?;
    let tolerance = args.tolerance.or(file.tolerance).unwrap_or(1e-6);
    let protocols: Vec<Protocol> = match &args.protocol {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))
                .map_err(config_err)?;
            vec![Protocol::from_json(&text).map_err(config_err)?]
        }
        None => {
            let count = args.count.or(file.count).unwrap_or(100);
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            (0..count)
                .map(|k| {
                    random_protocol(&mut rng, if k % 2 == 0 { 2 } else { 3 }, cfg.pulses.max(1))
                })
                .collect()
        }
    };
    let sine = OracleSettings::default();
    let gauss = OracleSettings {
        shape: EnvelopeShape::GaussianTruncated,
        ..sine
    };
    let mut reports = Vec::with_capacity(protocols.len());
    let mut shape_agreement: f64 = 0.0;
    for p in &protocols {
        let a = validate_protocol(p, tolerance, &sine, cfg.execution()).map_err(|e| anyhow!(e))?;
        let b = validate_protocol(p, tolerance, &gauss, cfg.execution()).map_err(|e| anyhow!(e))?;
        for (x, y) in a.states.iter().zip(&b.states) {
            shape_agreement = shape_agreement
                .max((x.numeric[0] - y.numeric[0]).hypot(x.numeric[1] - y.numeric[1]));
        }
        reports.push(a);
    }
    let failures = reports.iter().filter(|r| !r.passed).count();
    let max_deviation = reports.iter().map(|r| r.max_deviation).fold(0.0, f64::max);
    let summary = ValidationSummary {
        tolerance,
        protocols: reports.len(),
        failures,
        max_deviation,
        shape_agreement,
        reports,
    };
    write_meta(&cfg, "validate.json", Vec::new(), summary)?;
    if failures > 0 || shape_agreement >= tolerance {
        return Err(Failure::Validation(format!(
            "{failures} protocols above tolerance {tolerance:e}; max deviation {max_deviation:e}, envelope-shape spread {shape_agreement:e}"
        )));
    }
    Ok(())
}

fn configure_threads(threads: Option<usize>) -> anyhow::Result<()> {
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| anyhow!(e))?;
    }
    Ok(())
}

fn common(command: &Command) -> &CommonArgs {
    match command {
        Command::Map(a) | Command::EsopMap(a) => &a.common,
        Command::Robustness(a) => &a.common,
        Command::Bscan(a) => &a.common,
        Command::Optimize(a) => &a.common,
        Command::Validate(a) => &a.common,
    }
}

fn dispatch(cli: Cli) -> Outcome {
    let threads = common(&cli.command).threads.or_else(|| {
        common(&cli.command)
            .config
            .as_deref()
            .and_then(|p| FileConfig::load(p).ok()?.threads)
    });
    configure_threads(threads)?;
    match cli.command {
        Command::Map(a) => run_map(a, "map", 3),
        Command::EsopMap(a) => run_map(a, "esop-map", 4),
        Command::Robustness(a) => run_robustness(a),
        Command::Bscan(a) => run_bscan(a),
        Command::Optimize(a) => run_optimize(a),
        Command::Validate(a) => run_validate(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("configuration error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Validation(msg)) => {
            eprintln!("validation failed: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
