//! Subcommand implementations.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use clap::Args;
use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::estimator::{
    concurrence_lower_bound_with, pareto_frontier, scatter_all, sweep_fig1, BoundForm,
    ExponentChoice, ProtocolParams, ScatterPoint,
};
use crate::protocol::{analytic_mean, run_protocol, MeasurementSummary};
use crate::qcore::observable::ObservableLabel;

use super::check::check_product_bound;
use super::config::{load_json, load_or_default, PairingName, SimulateConfig};
use super::table::{fmt_sig12, CsvTable};
use super::{sibling_path, CliError, CommonArgs};

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn write_output(out: Option<&Path>, contents: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, contents)?,
        None => io::stdout().lock().write_all(contents.as_bytes())?,
    }
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

/// Logs the resolved parameters and writes the sidecar when output goes to a file.
fn record_config<T: Serialize>(
    command: &str,
    resolved: &T,
    out: Option<&Path>,
) -> Result<(), CliError> {
    #[derive(Serialize)]
    struct Sidecar<'a, T> {
        command: &'a str,
        config: &'a T,
    }
    let json = to_json(&Sidecar {
        command,
        config: resolved,
    });
    info!(
        "resolved {command} config: {}",
        serde_json::to_string(resolved).expect("serializable")
    );
    if let Some(path) = out {
        fs::write(sibling_path(path, "config.json"), json)?;
    }
    Ok(())
}

fn check_sqrt_vm(sqrt_vm: f64) -> Result<f64, CliError> {
    if !(sqrt_vm > 0.0 && sqrt_vm <= 1.0) {
        return Err(usage(format!("sqrt_vm = {sqrt_vm} must lie in (0, 1]")));
    }
    Ok(sqrt_vm * sqrt_vm)
}

// ---- fig1 ----

#[derive(Debug, Args, Clone, Default)]
pub struct Fig1Args {
    /// Exponent for K = N^beta [default 0.85]
    #[arg(long)]
    pub beta: Option<f64>,
    /// Comma-separated exponents for r = (N - K)^alpha
    #[arg(long = "alpha", value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,
    /// Square root of the measured value, in (0, 1] [default 0.8]
    #[arg(long)]
    pub sqrt_vm: Option<f64>,
    /// First N of the grid [default 10]
    #[arg(long)]
    pub n_min: Option<u64>,
    /// Last N of the grid, inclusive [default 500]
    #[arg(long)]
    pub n_max: Option<u64>,
    /// Grid spacing [default 5]
    #[arg(long)]
    pub n_step: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig1Config {
    pub beta: f64,
    pub alphas: Vec<f64>,
    pub sqrt_vm: f64,
    pub n_min: u64,
    pub n_max: u64,
    pub n_step: u64,
}

impl Default for Fig1Config {
    fn default() -> Self {
        Self {
            beta: 0.85,
            alphas: vec![0.75, 0.8, 0.85],
            sqrt_vm: 0.8,
            n_min: 10,
            n_max: 500,
            n_step: 5,
        }
    }
}

impl Fig1Config {
    pub fn resolve(common: &CommonArgs, args: &Fig1Args) -> Result<Self, CliError> {
        let mut c: Self = load_or_default(common.config.as_deref())?;
        if let Some(v) = args.beta {
            c.beta = v;
        }
        if let Some(v) = &args.alphas {
            c.alphas = v.clone();
        }
        if let Some(v) = args.sqrt_vm {
            c.sqrt_vm = v;
        }
        if let Some(v) = args.n_min {
            c.n_min = v;
        }
        if let Some(v) = args.n_max {
            c.n_max = v;
        }
        if let Some(v) = args.n_step {
            c.n_step = v;
        }
        Ok(c)
    }
}

pub fn fig1_table(cfg: &Fig1Config) -> Result<CsvTable, CliError> {
    let v_m = check_sqrt_vm(cfg.sqrt_vm)?;
    if cfg.n_min < 4 || cfg.n_max < cfg.n_min || cfg.n_step == 0 {
        return Err(usage(format!(
            "invalid N grid {}..{} step {} (need 4 <= N_min <= N_max, step >= 1)",
            cfg.n_min, cfg.n_max, cfg.n_step
        )));
    }
    if cfg.alphas.is_empty() {
        return Err(usage("at least one alpha is required"));
    }
    let choices = cfg
        .alphas
        .iter()
        .map(|&a| ExponentChoice::new(a, cfg.beta))
        .collect::<Result<Vec<_>, _>>()?;
    let grid: Vec<u64> = (cfg.n_min..=cfg.n_max)
        .step_by(cfg.n_step as usize)
        .collect();
    let curves = sweep_fig1(&choices, v_m, &grid)?;
    let mut table = CsvTable::new(&["N", "alpha", "K", "r", "E", "log10_E", "C_bar"]);
    for curve in &curves {
        for p in &curve.points {
            table.push(vec![
                p.total.to_string(),
                fmt_sig12(curve.choice.alpha),
                p.discarded.to_string(),
                p.r.to_string(),
                fmt_sig12(p.e),
                fmt_sig12(p.log10_e),
                fmt_sig12(p.c_bar),
            ]);
        }
    }
    Ok(table)
}

pub fn fig1(common: &CommonArgs, args: &Fig1Args) -> Result<(), CliError> {
    let cfg = Fig1Config::resolve(common, args)?;
    let table = fig1_table(&cfg)?;
    record_config("fig1", &cfg, common.out.as_deref())?;
    write_output(common.out.as_deref(), &table.to_string()?)
}

// ---- scatter ----

#[derive(Debug, Args, Clone, Default)]
pub struct ScatterArgs {
    /// Total number of copies
    #[arg(long = "n")]
    pub total: Option<u64>,
    /// Square root of the measured value, in (0, 1] [default 0.8]
    #[arg(long)]
    pub sqrt_vm: Option<f64>,
    /// Largest acceptable error bound; enables frontier output
    #[arg(long)]
    pub e_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScatterConfig {
    #[serde(rename = "N")]
    pub total: u64,
    pub sqrt_vm: f64,
    pub e_max: Option<f64>,
}

impl Default for ScatterConfig {
    fn default() -> Self {
        Self {
            total: 100,
            sqrt_vm: 0.8,
            e_max: None,
        }
    }
}

impl ScatterConfig {
    pub fn resolve(common: &CommonArgs, args: &ScatterArgs) -> Result<Self, CliError> {
        let mut c: Self = load_or_default(common.config.as_deref())?;
        if let Some(v) = args.total {
            c.total = v;
        }
        if let Some(v) = args.sqrt_vm {
            c.sqrt_vm = v;
        }
        if args.e_max.is_some() {
            c.e_max = args.e_max;
        }
        Ok(c)
    }
}

fn scatter_table(points: &[ScatterPoint]) -> CsvTable {
    let mut table = CsvTable::new(&["K", "r", "C_bar", "E", "log10_E"]);
    for p in points {
        table.push(vec![
            p.discarded.to_string(),
            p.r.to_string(),
            fmt_sig12(p.c_bar),
            fmt_sig12(p.e),
            fmt_sig12(p.log10_e),
        ]);
    }
    table
}

pub fn scatter(common: &CommonArgs, args: &ScatterArgs) -> Result<(), CliError> {
    let cfg = ScatterConfig::resolve(common, args)?;
    let v_m = check_sqrt_vm(cfg.sqrt_vm)?;
    if let Some(e) = cfg.e_max {
        if e.is_nan() || e <= 0.0 {
            return Err(usage(format!("e_max = {e} must be positive")));
        }
    }
    let points = scatter_all(cfg.total, v_m)?;
    record_config("scatter", &cfg, common.out.as_deref())?;
    write_output(common.out.as_deref(), &scatter_table(&points).to_string()?)?;

    let Some(e_max) = cfg.e_max else {
        return Ok(());
    };
    let result = pareto_frontier(&points, e_max)?;
    match &result.best {
        Some(b) => info!(
            "best feasible point: K={} r={} C_bar={} E={}",
            b.discarded,
            b.r,
            fmt_sig12(b.c_bar),
            fmt_sig12(b.e)
        ),
        None => warn!("no (K, r) satisfies E <= {e_max}; frontier is empty"),
    }
    let frontier = scatter_table(&result.frontier).to_string()?;
    match common.out.as_deref() {
        Some(path) => {
            fs::write(sibling_path(path, "frontier.csv"), frontier)?;
            fs::write(sibling_path(path, "best.json"), to_json(&result.best))?;
        }
        None => {
            let mut out = io::stdout().lock();
            writeln!(out)?;
            out.write_all(frontier.as_bytes())?;
        }
    }
    Ok(())
}

// ---- simulate ----

#[derive(Debug, Args, Clone, Default)]
pub struct SimulateArgs {
    /// Number of permute-then-measure rounds
    #[arg(long)]
    pub runs: Option<u64>,
    /// v1 or v2
    #[arg(long)]
    pub observable: Option<ObservableLabel>,
    /// single (one pair per round) or matching (all N/2 pairs)
    #[arg(long)]
    pub pairing: Option<PairingName>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationOutput {
    pub config: SimulateConfig,
    #[serde(flatten)]
    pub summary: MeasurementSummary,
    pub analytic_mean: f64,
    /// `(V_m - analytic_mean) / std_error`; null when undefined.
    pub z_score: Option<f64>,
}

pub fn resolve_simulate(
    common: &CommonArgs,
    args: &SimulateArgs,
) -> Result<SimulateConfig, CliError> {
    let path = common
        .config
        .as_deref()
        .ok_or_else(|| usage("simulate requires --config <file>"))?;
    let mut cfg: SimulateConfig = load_json(path)?;
    if let Some(v) = common.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.runs {
        cfg.runs = v;
    }
    if let Some(v) = args.observable {
        cfg.observable = v;
    }
    if let Some(v) = args.pairing {
        cfg.pairing = v;
    }
    Ok(cfg)
}

pub fn run_simulation(cfg: &SimulateConfig) -> Result<SimulationOutput, CliError> {
    let model = cfg.model.build()?;
    let summary = run_protocol(&model, &cfg.protocol_config())?;
    let mean = analytic_mean(&model, cfg.observable)?;
    let diff = summary.v_m - mean;
    let z_score = if summary.std_error > 0.0 {
        Some(diff / summary.std_error).filter(|z| z.is_finite())
    } else if diff.abs() <= 1e-12 {
        Some(0.0)
    } else {
        None
    };
    Ok(SimulationOutput {
        config: cfg.clone(),
        summary,
        analytic_mean: mean,
        z_score,
    })
}

pub fn simulate(common: &CommonArgs, args: &SimulateArgs) -> Result<(), CliError> {
    let cfg = resolve_simulate(common, args)?;
    let output = run_simulation(&cfg)?;
    record_config("simulate", &cfg, common.out.as_deref())?;
    write_output(common.out.as_deref(), &to_json(&output))?;

    let total = output.summary.total_pairs_measured as f64;
    let mut hist = CsvTable::new(&["outcome", "count", "frequency"]);
    for (&outcome, &count) in &output.summary.outcome_counts {
        hist.push(vec![
            outcome.to_string(),
            count.to_string(),
            fmt_sig12(count as f64 / total),
        ]);
    }
    match common.out.as_deref() {
        Some(path) => fs::write(sibling_path(path, "histogram.csv"), hist.to_string()?)?,
        None => {
            let mut out = io::stdout().lock();
            writeln!(out)?;
            out.write_all(hist.to_string()?.as_bytes())?;
        }
    }
    Ok(())
}

// ---- estimate ----

#[derive(Debug, Args, Clone, Default)]
pub struct EstimateArgs {
    /// Measured mean of the collective observable
    #[arg(long, allow_hyphen_values = true)]
    pub vm: Option<f64>,
    /// Total copies generated
    #[arg(long = "n")]
    pub total: Option<u64>,
    /// Copies discarded
    #[arg(long = "k")]
    pub discarded: Option<u64>,
    /// Copies assumed bad
    #[arg(long = "r")]
    pub bad: Option<u64>,
    /// Use C_bar = ((n - r)/n) C_min instead of the square-root form
    #[arg(long)]
    pub literal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct EstimateConfig {
    pub vm: Option<f64>,
    #[serde(rename = "N")]
    pub total: Option<u64>,
    #[serde(rename = "K")]
    pub discarded: Option<u64>,
    pub r: Option<u64>,
    pub literal: bool,
}

pub fn estimate(common: &CommonArgs, args: &EstimateArgs) -> Result<(), CliError> {
    let mut cfg: EstimateConfig = load_or_default(common.config.as_deref())?;
    cfg.vm = args.vm.or(cfg.vm);
    cfg.total = args.total.or(cfg.total);
    cfg.discarded = args.discarded.or(cfg.discarded);
    cfg.r = args.bad.or(cfg.r);
    cfg.literal |= args.literal;
    let missing = |name: &str| usage(format!("estimate requires --{name}"));
    let vm = cfg.vm.ok_or_else(|| missing("vm"))?;
    let params = ProtocolParams::new(
        cfg.total.ok_or_else(|| missing("n"))?,
        cfg.discarded.ok_or_else(|| missing("k"))?,
        cfg.r.ok_or_else(|| missing("r"))?,
    )?;
    let form = if cfg.literal {
        BoundForm::Literal
    } else {
        BoundForm::SquareRoot
    };
    let report = concurrence_lower_bound_with(vm, &params, form)?;
    record_config("estimate", &cfg, common.out.as_deref())?;
    write_output(common.out.as_deref(), &to_json(&report))
}

// ---- check-bound ----

#[derive(Debug, Args, Clone, Default)]
pub struct CheckBoundArgs {
    /// Number of random product pairs
    #[arg(long)]
    pub samples: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckBoundConfig {
    pub samples: u64,
    pub seed: u64,
}

impl Default for CheckBoundConfig {
    fn default() -> Self {
        Self {
            samples: 10_000,
            seed: 0,
        }
    }
}

pub fn check_bound(common: &CommonArgs, args: &CheckBoundArgs) -> Result<(), CliError> {
    let mut cfg: CheckBoundConfig = load_or_default(common.config.as_deref())?;
    if let Some(v) = args.samples {
        cfg.samples = v;
    }
    if let Some(v) = common.seed {
        cfg.seed = v;
    }
    if cfg.samples == 0 {
        return Err(usage("samples must be at least 1"));
    }
    let report = check_product_bound(cfg.samples, cfg.seed)?;
    record_config("check-bound", &cfg, common.out.as_deref())?;
    write_output(common.out.as_deref(), &to_json(&report))?;
    info!(
        "product states: {} checks, {} violations; counterexample lhs={} rhs={}",
        report.product_states.checks,
        report.product_states.violations,
        fmt_sig12(report.counterexample.lhs),
        fmt_sig12(report.counterexample.rhs_v1)
    );
    if !report.pass {
        return Err(CliError::CheckFailed(format!(
            "{} product-state violations; counterexample detected: {}",
            report.product_states.violations, report.counterexample.violation_detected
        )));
    }
    Ok(())
}
