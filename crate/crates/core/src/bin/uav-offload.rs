//! Command-line front end: train, eval, sweep and oracle.

use std::ops::Range;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use uav_offload::gnn::{ChainConfig, ChainParams};
use uav_offload::oracle::{enumerate_optimal, SmallInstance};
use uav_offload::rl::{train, FlatDqn, FlatDqnConfig, QNetwork, TrainConfig, TrainingLog};
use uav_offload::scenario::{build_topology, generate_tasks, ScenarioConfig};
use uav_offload::sim::evaluate;
use uav_offload::sweep::{run_sweep, write_rows_csv, Experiment, Models, PolicyKind, SweepSpec};
use uav_offload::{Error, Result};

#[derive(Parser)]
#[command(name = "uav-offload", version, about = "UAV-aided task offloading simulator")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Train a gnn or dqn policy and write its checkpoint.
    Train(TrainArgs),
    /// Evaluate policies on a range of workload seeds.
    Eval(EvalArgs),
    /// Run a parameter sweep.
    Sweep(SweepArgs),
    /// Enumerate every schedule of a small instance.
    Oracle(OracleArgs),
}

#[derive(Args)]
struct TrainArgs {
    /// Scenario JSON; the default scenario when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = ["gnn", "dqn"], default_value = "gnn")]
    policy: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Episodes for the built-in recipe; ignored with --train-config.
    #[arg(long, default_value_t = 300)]
    episodes: usize,
    /// Training hyperparameters as JSON. Its seed is replaced by --seed.
    #[arg(long)]
    train_config: Option<PathBuf>,
    /// Checkpoint path. The episode log goes next to it as `<out>.log.csv`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Workload seeds, `N` or `N..M` (M exclusive).
    #[arg(long, value_parser = parse_seeds, default_value = "0..10")]
    seeds: Range<u64>,
    #[arg(long = "policy", required = true)]
    policies: Vec<PolicyKind>,
    /// Checkpoints for the learned policies; the kind is read from the file.
    #[arg(long = "checkpoint")]
    checkpoints: Vec<PathBuf>,
    /// Per-episode CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    experiment: Experiment,
    /// Sweep points; the experiment's defaults when omitted.
    #[arg(long, value_delimiter = ',')]
    values: Vec<f64>,
    #[arg(long, value_parser = parse_seeds, default_value = "0..5")]
    seeds: Range<u64>,
    #[arg(long = "policy", required = true)]
    policies: Vec<PolicyKind>,
    #[arg(long = "checkpoint")]
    checkpoints: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct OracleArgs {
    /// Scenario JSON; the two-UAV instance when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Score of every schedule, CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct EvalRow {
    policy: String,
    seed: u64,
    violations: usize,
    tasks: usize,
    violation_rate: f64,
    min_remaining_energy: f64,
    objective: f64,
}

fn parse_seeds(s: &str) -> std::result::Result<Range<u64>, String> {
    let bad = |_| format!("expected N or N..M, got {s:?}");
    let range = match s.split_once("..") {
        Some((a, b)) => a.parse().map_err(bad)?..b.parse().map_err(bad)?,
        None => {
            let n: u64 = s.parse().map_err(bad)?;
            n..n + 1
        }
    };
    if range.is_empty() {
        return Err(format!("empty seed range {s:?}"));
    }
    Ok(range)
}

fn scenario(path: Option<&Path>, fallback: fn() -> ScenarioConfig) -> Result<ScenarioConfig> {
    let config = match path {
        Some(p) => ScenarioConfig::from_json_file(p)?,
        None => fallback(),
    };
    config.validate()?;
    Ok(config)
}

fn load_models(paths: &[PathBuf]) -> Result<Models> {
    let mut models = Models::default();
    for p in paths {
        models.add_checkpoint(p)?;
    }
    Ok(models)
}

fn run_train(args: TrainArgs) -> Result<()> {
    let config = scenario(args.config.as_deref(), ScenarioConfig::default)?;
    let cfg = match &args.train_config {
        Some(p) => TrainConfig { seed: args.seed, ..serde_json::from_str(&std::fs::read_to_string(p)?)? },
        None => TrainConfig::quick(args.episodes, args.seed),
    };
    let log = match args.policy.as_str() {
        "gnn" => fit(ChainParams::new(ChainConfig::small(), args.seed)?, &config, &cfg, &args.out)?,
        _ => {
            let flat = FlatDqnConfig { num_iot: config.num_iot, num_uav: config.num_uav, hidden: vec![64] };
            fit(FlatDqn::new(flat, args.seed)?, &config, &cfg, &args.out)?
        }
    };
    let mut log_path = args.out.clone().into_os_string();
    log_path.push(".log.csv");
    log.write_csv(&log_path)?;
    if let Some((ep, reward)) = log.selected {
        eprintln!("kept the greedy snapshot of episode {ep} (reward {reward:.3})");
    }
    eprintln!("wrote {}", args.out.display());
    Ok(())
}

fn fit<N: QNetwork>(net: N, config: &ScenarioConfig, cfg: &TrainConfig, out: &Path) -> Result<TrainingLog> {
    let (net, log) = train(net, config, cfg)?;
    net.save(out)?;
    Ok(log)
}

fn run_eval(args: EvalArgs) -> Result<()> {
    let config = scenario(args.config.as_deref(), ScenarioConfig::default)?;
    let models = load_models(&args.checkpoints)?;
    let mut rows = Vec::new();
    for &kind in &args.policies {
        for seed in args.seeds.clone() {
            let mut policy = models.policy(kind, seed)?;
            let m = evaluate(&config, seed, policy.as_mut())?;
            rows.push(EvalRow {
                policy: kind.to_string(),
                seed,
                violations: m.violations,
                tasks: m.tasks,
                violation_rate: m.violation_rate(),
                min_remaining_energy: m.min_remaining_energy,
                objective: m.objective,
            });
        }
    }
    println!("{:<7} {:>11} {:>9} {:>10}", "policy", "violations", "min R", "objective");
    for &kind in &args.policies {
        let mine: Vec<&EvalRow> = rows.iter().filter(|r| r.policy == kind.to_string()).collect();
        let n = mine.len() as f64;
        let mean = |f: fn(&EvalRow) -> f64| mine.iter().map(|r| f(r)).sum::<f64>() / n;
        println!(
            "{:<7} {:>11.1} {:>9.2} {:>10.4}",
            kind.to_string(),
            mean(|r| r.violations as f64),
            mean(|r| r.min_remaining_energy),
            mean(|r| r.objective)
        );
    }
    if let Some(out) = &args.out {
        write_rows_csv(out, &rows)?;
    }
    Ok(())
}

fn run_sweep_verb(args: SweepArgs) -> Result<()> {
    let config = scenario(args.config.as_deref(), ScenarioConfig::default)?;
    let models = load_models(&args.checkpoints)?;
    let mut spec = SweepSpec::new(args.experiment, args.seeds.collect(), args.policies);
    if !args.values.is_empty() {
        spec.values = args.values;
    }
    let rows = run_sweep(&config, &spec, &models)?;
    write_rows_csv(&args.out, &rows)?;
    let failed = rows.iter().filter(|r| r.status != "ok").count();
    eprintln!("wrote {} rows to {} ({failed} cells could not run)", rows.len(), args.out.display());
    Ok(())
}

fn run_oracle(args: OracleArgs) -> Result<()> {
    let result = match &args.config {
        Some(p) => {
            let config = scenario(Some(p), ScenarioConfig::tiny)?;
            let topology = build_topology(&config)?;
            let workload = generate_tasks(&config, config.rng_seed)?;
            enumerate_optimal(&config, &topology, &workload)?
        }
        None => SmallInstance::tiny().solve()?,
    };
    let b = &result.best;
    println!(
        "best schedule {}: objective {:.6}, violations {}, min remaining energy {}",
        b.schedule, b.objective, b.violations, b.min_remaining_energy
    );
    if let Some(out) = &args.out {
        result.write_csv(out)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.verb {
        Verb::Train(a) => run_train(a),
        Verb::Eval(a) => run_eval(a),
        Verb::Sweep(a) => run_sweep_verb(a),
        Verb::Oracle(a) => run_oracle(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, Error::Config(_) | Error::Checkpoint(_)) {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
