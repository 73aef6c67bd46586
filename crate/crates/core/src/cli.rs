//! Command-line front end: `simulate`, `sweep`, `demo` and `bounds`.
//!
//! Exit codes: 0 on success, 1 when a checked bound, invariant or demo
//! verdict fails, 2 on invalid input.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::adversary::{load_script, script::minimal_b, StrategySpec};
use crate::algorithms::{AlgorithmKind, JoinRule};
use crate::bounds::{bounds_for, compare, render_table, BoundReport};
use crate::error::{Error, Result};
use crate::explorer::{self, Demo};
use crate::model::{AdversaryType, ChannelMode, Rate, RunConfig};
use crate::simulator::{write_csv, RunOutput, Simulation};

#[derive(Debug, Parser)]
#[command(
    name = "macsim",
    version,
    about = "Adversarial multiple-access channel simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one execution and write its trace, metrics and report.
    Simulate(SimulateArgs),
    /// Run a grid of executions and print a CSV summary.
    Sweep(SweepArgs),
    /// Run one of the impossibility demonstrations.
    Demo(DemoArgs),
    /// Print the closed-form bounds for an algorithm and adversary.
    Bounds(BoundsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum StrategyName {
    None,
    Saturating,
    StackPersistent,
    QueuePersistent,
    Scripted,
    Bernoulli,
    Random,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// RunConfig JSON; replaces the run flags below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub algorithm: Option<AlgorithmKind>,
    /// Injection rate as `p/q`.
    #[arg(long)]
    pub rho: Option<Rate>,
    #[arg(long)]
    pub b: Option<u32>,
    #[arg(long, default_value_t = 1)]
    pub k_activating: u32,
    #[arg(long, value_enum, default_value = "none")]
    pub strategy: StrategyName,
    /// Injection script for `--strategy scripted`.
    #[arg(long)]
    pub script: Option<PathBuf>,
    #[arg(long, default_value_t = 10_000)]
    pub horizon: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub no_collision_detection: bool,
    #[arg(long, value_enum, default_value = "reconciled")]
    pub join_rule: JoinRule,
    /// Exit 1 if the measured latency or queue exceeds the bound.
    #[arg(long)]
    pub check_bounds: bool,
    #[arg(long)]
    pub check_invariants: bool,
    #[arg(long, env = "MACSIM_OUT", default_value = "macsim-out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum, value_delimiter = ',', num_args = 0..)]
    pub algorithm: Vec<AlgorithmKind>,
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    pub rho: Vec<Rate>,
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    pub b: Vec<u32>,
    /// Defaults to each algorithm's worst-case strategy.
    #[arg(long, value_enum)]
    pub strategy: Option<StrategyName>,
    #[arg(long, default_value_t = 10_000)]
    pub horizon: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub no_collision_detection: bool,
    #[arg(long)]
    pub check_invariants: bool,
    #[arg(long, default_value_t = 4)]
    pub workers: usize,
    /// Summary CSV path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    /// two-activating, ack-unfair, rate-one or one-third-unfair.
    pub name: String,
    #[arg(long, value_enum, default_value = "counting-backoff")]
    pub algorithm: AlgorithmKind,
    #[arg(long)]
    pub rho: Option<Rate>,
    #[arg(long)]
    pub b: Option<u32>,
    #[arg(long)]
    pub horizon: Option<u64>,
    /// Directory for `trace.csv` and `verdict.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long, value_enum)]
    pub algorithm: AlgorithmKind,
    #[arg(long)]
    pub rho: Rate,
    #[arg(long)]
    pub b: u32,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Demo(a) => cmd_demo(&a),
        Command::Bounds(a) => cmd_bounds(&a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn strategy_spec(name: StrategyName, script: Option<&Path>) -> Result<StrategySpec> {
    Ok(match name {
        StrategyName::None => StrategySpec::None,
        StrategyName::Saturating => StrategySpec::Saturating,
        StrategyName::StackPersistent => StrategySpec::StackPersistent,
        StrategyName::QueuePersistent => StrategySpec::QueuePersistent,
        StrategyName::Bernoulli => StrategySpec::Bernoulli { probability: None },
        StrategyName::Random => StrategySpec::Random,
        StrategyName::Scripted => {
            let path =
                script.ok_or_else(|| Error::Config("--strategy scripted needs --script".into()))?;
            StrategySpec::Scripted {
                script: load_script(path)?,
            }
        }
    })
}

fn simulate_config(a: &SimulateArgs) -> Result<RunConfig> {
    if let Some(path) = &a.config {
        let mut config = RunConfig::from_json(&fs::read_to_string(path)?)?;
        config.invariant_checks |= a.check_invariants;
        return Ok(config);
    }
    let algorithm = a
        .algorithm
        .ok_or_else(|| Error::Config("--algorithm is required".into()))?;
    let strategy = strategy_spec(a.strategy, a.script.as_deref())?;
    let (rho, b) = match (a.rho, a.b, &strategy) {
        (Some(rho), b, _) => (rho, b.unwrap_or(1)),
        // a script fixes its own budget: the least bursty rate-1 adversary
        (None, b, StrategySpec::Scripted { script }) => {
            (Rate::ONE, b.unwrap_or_else(|| minimal_b(script, Rate::ONE)))
        }
        (None, ..) => return Err(Error::Config("--rho is required".into())),
    };
    let t = AdversaryType::with_activation(rho, b, a.k_activating)?;
    let mut config = RunConfig::new(algorithm, t, strategy)
        .horizon(a.horizon)
        .mode(ChannelMode {
            collision_detection: !a.no_collision_detection,
        });
    config.seed = a.seed;
    config.invariant_checks = a.check_invariants;
    config.join_rule = a.join_rule;
    Ok(config)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    writeln!(f)?;
    Ok(())
}

fn bound_report(out: &RunOutput) -> Option<BoundReport> {
    let c = &out.config;
    bounds_for(c.algorithm, &c.adversary_type)
        .ok()
        .map(|b| compare(c.algorithm, &c.adversary_type, &out.metrics, &b))
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<i32> {
    let config = simulate_config(a)?;
    let mut sim = Simulation::new(config)?;
    let outcome = sim.run_to_horizon();
    let failure = match outcome {
        Ok(()) => None,
        Err(Error::Invariant(f)) => Some(f),
        Err(e) => return Err(e),
    };
    let out = sim.finish();
    fs::create_dir_all(&a.out)?;
    write_csv(&out.trace, fs::File::create(a.out.join("trace.csv"))?)?;
    write_json(&a.out.join("metrics.json"), &out.metrics)?;
    let bounds = bound_report(&out);
    let report = json!({
        "config": out.config,
        "rounds": out.trace.len(),
        "max_latency": out.metrics.max_latency,
        "max_queued": out.metrics.max_queued,
        "unheard": out.metrics.unheard_count,
        "double_phase_lengths": out.double_phase_lengths(),
        "bounds": bounds,
        "invariant_failure": failure,
    });
    write_json(&a.out.join("report.json"), &report)?;

    println!(
        "{} rounds, max latency {}, max queued {}, unheard {}",
        out.trace.len(),
        out.metrics
            .max_latency
            .map_or_else(|| "-".into(), |l| l.to_string()),
        out.metrics.max_queued,
        out.metrics.unheard_count
    );
    if out.config.algorithm == AlgorithmKind::QuadrupleRound {
        let lengths = out.double_phase_lengths();
        let shown: Vec<String> = lengths.iter().take(8).map(u64::to_string).collect();
        let more = if lengths.len() > 8 { ", ..." } else { "" };
        println!("double phase lengths: [{}{more}]", shown.join(", "));
    }
    if let Some(f) = &failure {
        eprintln!("invariant violation: {f}");
        return Ok(1);
    }
    if a.check_bounds {
        match &bounds {
            Some(r) => {
                print!("{}", render_table(std::slice::from_ref(r)));
                if !r.satisfied {
                    return Ok(1);
                }
            }
            None => {
                return Err(Error::Config(format!(
                    "no bounds are known for {} against {}",
                    out.config.algorithm, out.config.adversary_type
                )))
            }
        }
    }
    Ok(0)
}

/// Column order of the sweep summary.
pub const SWEEP_COLUMNS: [&str; 12] = [
    "algorithm",
    "rho",
    "b",
    "strategy",
    "horizon",
    "bound_latency",
    "measured_latency",
    "bound_queue",
    "measured_queue",
    "unheard",
    "satisfied",
    "error",
];

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub algorithm: AlgorithmKind,
    pub rho: String,
    pub b: u32,
    pub strategy: String,
    pub horizon: u64,
    pub bound_latency: String,
    pub measured_latency: String,
    pub bound_queue: String,
    pub measured_queue: String,
    pub unheard: String,
    pub satisfied: bool,
    pub error: String,
}

pub fn worst_case_strategy(algorithm: AlgorithmKind) -> StrategyName {
    match algorithm {
        AlgorithmKind::CountingBackoff => StrategyName::StackPersistent,
        AlgorithmKind::QueueBackoff => StrategyName::QueuePersistent,
        AlgorithmKind::QuadrupleRound | AlgorithmKind::AckPersistent => StrategyName::Saturating,
    }
}

fn sweep_cell(a: &SweepArgs, algorithm: AlgorithmKind, rho: Rate, b: u32) -> SweepRow {
    let name = a.strategy.unwrap_or_else(|| worst_case_strategy(algorithm));
    let mut row = SweepRow {
        algorithm,
        rho: rho.to_string(),
        b,
        strategy: format!("{name:?}"),
        horizon: a.horizon,
        bound_latency: String::new(),
        measured_latency: String::new(),
        bound_queue: String::new(),
        measured_queue: String::new(),
        unheard: String::new(),
        satisfied: false,
        error: String::new(),
    };
    let result = (|| -> Result<BoundReport> {
        let t = AdversaryType::new(rho, b)?;
        let strategy = strategy_spec(name, None)?;
        row.strategy = strategy.name().to_owned();
        let mut config = RunConfig::new(algorithm, t, strategy)
            .horizon(a.horizon)
            .mode(ChannelMode {
                collision_detection: !a.no_collision_detection,
            });
        config.seed = a.seed;
        config.invariant_checks = a.check_invariants;
        let bounds = bounds_for(algorithm, &t)?;
        let out = crate::simulator::run(config)?;
        Ok(compare(algorithm, &t, &out.metrics, &bounds))
    })();
    match result {
        Ok(r) => {
            row.bound_latency = r.bound_latency.to_string();
            row.measured_latency = r
                .measured_latency
                .map_or_else(String::new, |l| l.to_string());
            row.bound_queue = r.bound_queue.to_string();
            row.measured_queue = r.measured_queue.to_string();
            row.unheard = r.unheard.to_string();
            row.satisfied = r.satisfied;
        }
        Err(e) => row.error = e.to_string(),
    }
    row
}

/// Runs every cell of the grid on a bounded pool; rows come back in grid
/// order.
pub fn sweep(a: &SweepArgs) -> Result<Vec<SweepRow>> {
    let mut cells = Vec::new();
    for &algorithm in &a.algorithm {
        for &rho in &a.rho {
            for &b in &a.b {
                cells.push((algorithm, rho, b));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.workers.max(1))
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    Ok(pool.install(|| {
        cells
            .par_iter()
            .map(|&(alg, rho, b)| sweep_cell(a, alg, rho, b))
            .collect()
    }))
}

pub fn cmd_sweep(a: &SweepArgs) -> Result<i32> {
    let rows = sweep(a)?;
    let sink: Box<dyn Write> = match &a.out {
        Some(path) => Box::new(fs::File::create(path)?),
        None => Box::new(std::io::stdout()),
    };
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(sink);
    w.write_record(SWEEP_COLUMNS)?;
    for row in &rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(if rows.iter().all(|r| r.satisfied) {
        0
    } else {
        1
    })
}

pub fn run_demo(a: &DemoArgs) -> Result<Demo> {
    match a.name.as_str() {
        "two-activating" => explorer::demo_two_activating(a.algorithm, a.horizon.unwrap_or(1_000)),
        "ack-unfair" => explorer::demo_ack_unfair(
            a.rho.unwrap_or(Rate::new(1, 2)?),
            a.b.unwrap_or(2),
            a.horizon.unwrap_or(1_000),
        ),
        "rate-one" => {
            explorer::demo_rate_one(a.algorithm, a.b.unwrap_or(1), a.horizon.unwrap_or(1_000))
        }
        "one-third-unfair" => explorer::demo_counting_backoff_unfair_at_one_third(
            a.b.unwrap_or(3),
            a.horizon.unwrap_or(10_000),
        ),
        other => Err(Error::Config(format!(
            "unknown demo {other:?}; expected two-activating, ack-unfair, rate-one or one-third-unfair"
        ))),
    }
}

pub fn cmd_demo(a: &DemoArgs) -> Result<i32> {
    let demo = run_demo(a)?;
    println!("{}", serde_json::to_string(&demo.verdict)?);
    if let Some(dir) = &a.out {
        fs::create_dir_all(dir)?;
        write_csv(&demo.trace, fs::File::create(dir.join("trace.csv"))?)?;
        write_json(&dir.join("verdict.json"), &demo.verdict)?;
    }
    Ok(if demo.verdict.pass { 0 } else { 1 })
}

pub fn cmd_bounds(a: &BoundsArgs) -> Result<i32> {
    let t = AdversaryType::new(a.rho, a.b)?;
    let bounds = bounds_for(a.algorithm, &t)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&json!({
            "algorithm": a.algorithm,
            "adversary_type": t,
            "bounds": bounds,
        }))?
    );
    Ok(0)
}
