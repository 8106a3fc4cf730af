//! Seeded parameter sweeps over trained and heuristic policies.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gnn::checkpoint::decode;
use crate::gnn::{ChainParams, ModelKind};
use crate::rl::{FlatDqn, Greedy};
use crate::scenario::{build_topology, generate_tasks, ScenarioConfig, KBYTE_BITS};
use crate::sim::{run_episode, EpisodeMetrics, HFc, HRr, Policy, RandomPolicy, Simulator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    /// Multiplier on the UAV-C processing capacity.
    Capacity,
    /// Packet size of every task type, KB.
    PacketSize,
    /// Multiplier on every task type's mean load.
    Load,
    /// Number of UAV-Cs removed, highest indices first.
    UavFailure,
    /// Number of IoT devices; loads and packets scale by `base I / I`.
    Scalability,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::Capacity,
        Experiment::PacketSize,
        Experiment::Load,
        Experiment::UavFailure,
        Experiment::Scalability,
    ];

    pub fn default_values(self) -> Vec<f64> {
        match self {
            Experiment::Capacity => vec![0.5, 0.75, 1.0, 1.5, 2.0],
            Experiment::PacketSize => vec![16.0, 32.0, 64.0, 128.0],
            Experiment::Load => vec![0.5, 1.0, 1.5, 2.0],
            Experiment::UavFailure => vec![0.0, 1.0, 2.0],
            Experiment::Scalability => vec![24.0, 48.0, 96.0],
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Experiment::Capacity => "capacity",
            Experiment::PacketSize => "packet_size",
            Experiment::Load => "load",
            Experiment::UavFailure => "uav_failure",
            Experiment::Scalability => "scalability",
        })
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.to_string() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Gnn,
    Dqn,
    Hfc,
    Hrr,
    Random,
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PolicyKind::Gnn => "gnn",
            PolicyKind::Dqn => "dqn",
            PolicyKind::Hfc => "hfc",
            PolicyKind::Hrr => "hrr",
            PolicyKind::Random => "random",
        })
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gnn" => Ok(PolicyKind::Gnn),
            "dqn" => Ok(PolicyKind::Dqn),
            "hfc" => Ok(PolicyKind::Hfc),
            "hrr" => Ok(PolicyKind::Hrr),
            "random" => Ok(PolicyKind::Random),
            _ => Err(Error::Config(format!("unknown policy {s:?}"))),
        }
    }
}

/// Trained networks available to a sweep.
#[derive(Debug, Clone, Default)]
pub struct Models {
    pub gnn: Option<ChainParams>,
    pub dqn: Option<FlatDqn>,
}

impl Models {
    /// Load a checkpoint of either kind into its slot.
    pub fn add_checkpoint(&mut self, path: impl AsRef<Path>) -> Result<ModelKind> {
        let bytes = std::fs::read(path)?;
        let kind = decode(&bytes)?.kind;
        match kind {
            ModelKind::Chain => self.gnn = Some(ChainParams::from_bytes(&bytes)?),
            ModelKind::FlatDqn => self.dqn = Some(FlatDqn::from_bytes(&bytes)?),
        }
        Ok(kind)
    }

    pub fn policy(&self, kind: PolicyKind, seed: u64) -> Result<Box<dyn Policy>> {
        let missing = |what: &str| Error::Config(format!("policy {what} needs a checkpoint"));
        Ok(match kind {
            PolicyKind::Gnn => Box::new(Greedy::new(self.gnn.clone().ok_or_else(|| missing("gnn"))?, "gnn")),
            PolicyKind::Dqn => Box::new(Greedy::new(self.dqn.clone().ok_or_else(|| missing("dqn"))?, "dqn")),
            PolicyKind::Hfc => Box::new(HFc),
            PolicyKind::Hrr => Box::new(HRr),
            PolicyKind::Random => Box::new(RandomPolicy::new(seed)),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub experiment: Experiment,
    pub values: Vec<f64>,
    /// Workload seeds.
    pub seeds: Vec<u64>,
    pub policies: Vec<PolicyKind>,
}

impl SweepSpec {
    pub fn new(experiment: Experiment, seeds: Vec<u64>, policies: Vec<PolicyKind>) -> Self {
        Self { values: experiment.default_values(), experiment, seeds, policies }
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() || self.seeds.is_empty() || self.policies.is_empty() {
            return Err(Error::Config("a sweep needs values, seeds and policies".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub experiment: String,
    pub policy: String,
    pub sweep_value: f64,
    pub seed: u64,
    pub violations: usize,
    pub tasks: usize,
    pub min_remaining_energy: f64,
    pub objective: f64,
    /// `ok`, or why the cell could not run.
    pub status: String,
}

/// The scenario of one sweep cell and the UAV-Cs removed from its topology.
pub fn cell_scenario(base: &ScenarioConfig, experiment: Experiment, value: f64) -> Result<(ScenarioConfig, Vec<usize>)> {
    let mut c = base.clone();
    let mut removed = Vec::new();
    match experiment {
        Experiment::Capacity => c.uav_capacity *= value,
        Experiment::PacketSize => {
            for tt in &mut c.task_types {
                tt.packet_bits = value * KBYTE_BITS;
            }
        }
        Experiment::Load => c.scale_loads(value),
        Experiment::UavFailure => {
            let k = value as usize;
            if value < 0.0 || value.fract() != 0.0 || k >= base.num_uav {
                return Err(Error::Config(format!("cannot remove {value} of {} UAV-Cs", base.num_uav)));
            }
            removed = (base.num_uav - k..base.num_uav).collect();
        }
        Experiment::Scalability => {
            if !(value >= 1.0) || value.fract() != 0.0 {
                return Err(Error::Config(format!("IoT count must be a positive integer, got {value}")));
            }
            let factor = base.num_iot as f64 / value;
            c.num_iot = value as usize;
            c.scale_loads(factor);
            c.scale_packets(factor);
        }
    }
    c.validate()?;
    Ok((c, removed))
}

/// Run one sweep cell.
pub fn run_cell(
    base: &ScenarioConfig,
    experiment: Experiment,
    value: f64,
    seed: u64,
    policy: &mut dyn Policy,
) -> Result<EpisodeMetrics> {
    let (config, removed) = cell_scenario(base, experiment, value)?;
    let topology = build_topology(&config)?.without_uavs(&removed)?;
    let workload = generate_tasks(&config, seed)?;
    let mut sim = Simulator::new(&config, topology, workload)?;
    run_episode(&mut sim, policy)
}

/// Every `(value, seed, policy)` cell. Cells that fail (for example a fixed
/// input network on a larger graph) are reported with their error status.
pub fn run_sweep(base: &ScenarioConfig, spec: &SweepSpec, models: &Models) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let mut rows = Vec::new();
    for &value in &spec.values {
        for &seed in &spec.seeds {
            for &kind in &spec.policies {
                let mut policy = models.policy(kind, seed)?;
                let mut row = SweepRow {
                    experiment: spec.experiment.to_string(),
                    policy: kind.to_string(),
                    sweep_value: value,
                    seed,
                    violations: 0,
                    tasks: 0,
                    min_remaining_energy: f64::NAN,
                    objective: f64::NAN,
                    status: "ok".into(),
                };
                match run_cell(base, spec.experiment, value, seed, policy.as_mut()) {
                    Ok(m) => {
                        row.violations = m.violations;
                        row.tasks = m.tasks;
                        row.min_remaining_energy = m.min_remaining_energy;
                        row.objective = m.objective;
                    }
                    Err(e @ (Error::Shape(_) | Error::Config(_))) => row.status = e.to_string(),
                    Err(e) => return Err(e),
                }
                rows.push(row);
            }
        }
    }
    Ok(rows)
}

pub fn write_rows_csv<T: Serialize>(path: impl AsRef<Path>, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Seed-averaged `(value, mean violations)` of one policy's successful cells.
pub fn mean_violations(rows: &[SweepRow], policy: PolicyKind) -> Vec<(f64, f64)> {
    mean_by_value(rows, policy, |r| r.violations as f64)
}

/// Seed-averaged `(value, mean violation rate)` of one policy.
pub fn mean_violation_rate(rows: &[SweepRow], policy: PolicyKind) -> Vec<(f64, f64)> {
    mean_by_value(rows, policy, |r| if r.tasks == 0 { 0.0 } else { r.violations as f64 / r.tasks as f64 })
}

pub fn mean_objective(rows: &[SweepRow], policy: PolicyKind) -> Vec<(f64, f64)> {
    mean_by_value(rows, policy, |r| r.objective)
}

fn mean_by_value(rows: &[SweepRow], policy: PolicyKind, f: impl Fn(&SweepRow) -> f64) -> Vec<(f64, f64)> {
    let name = policy.to_string();
    let mut out: Vec<(f64, f64, usize)> = Vec::new();
    for r in rows.iter().filter(|r| r.policy == name && r.status == "ok") {
        match out.iter_mut().find(|(v, _, _)| *v == r.sweep_value) {
            Some(cell) => {
                cell.1 += f(r);
                cell.2 += 1;
            }
            None => out.push((r.sweep_value, f(r), 1)),
        }
    }
    out.into_iter().map(|(v, s, n)| (v, s / n as f64)).collect()
}
