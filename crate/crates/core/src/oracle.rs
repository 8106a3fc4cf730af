//! Exact answers for small instances.
//!
//! [`enumerate_optimal`] scores every activation schedule of a small
//! episode. [`reference`] re-derives the delay, energy and objective values
//! from the raw formulas with none of the simulator's code, so the two can
//! be cross-checked. [`check_milp_feasibility`] audits an assignment against
//! the flow, placement and big-M activation constraints.

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::routing::{check_flow_with_sink, validate_with_big_m, Assignment, ConstraintViolation, FlowSink};
use crate::scenario::{ScenarioConfig, Task, Topology, Workload};
use crate::sim::{run_episode, FixedSchedule, Simulator};

/// Largest number of schedules [`enumerate_optimal`] will score.
pub const MAX_SCHEDULES: u64 = 1 << 15;

/// A scenario small enough to enumerate: at most 3 UAV-Cs, 5 intervals and
/// 6 IoT devices emitting one task each per interval.
#[derive(Debug, Clone, PartialEq)]
pub struct SmallInstance {
    pub config: ScenarioConfig,
    /// Big-M of the activation constraint; defaults to the number of IoT
    /// devices, the most tasks one interval can hold.
    pub big_m: f64,
}

impl SmallInstance {
    pub fn new(config: ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let (i, j, t) = (config.num_iot, config.num_uav, config.num_intervals);
        if j > 3 || t > 5 || i > 6 || config.max_tasks_per_interval > 1 {
            return Err(Error::TooLarge(format!(
                "small instances need J <= 3, T <= 5, I <= 6 and one task per device (got J={j}, T={t}, I={i}, cap {})",
                config.max_tasks_per_interval
            )));
        }
        Ok(Self { big_m: i as f64, config })
    }

    pub fn tiny() -> Self {
        Self::new(ScenarioConfig::tiny()).expect("the tiny scenario is small")
    }

    /// Enumerate over the scenario's own topology and `rng_seed` workload.
    pub fn solve(&self) -> Result<OracleResult> {
        let topology = crate::scenario::build_topology(&self.config)?;
        let workload = crate::scenario::generate_tasks(&self.config, self.config.rng_seed)?;
        enumerate_optimal(&self.config, &topology, &workload)
    }
}

/// One row of the score table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScheduleScore {
    /// `|`-separated intervals of `0`/`1` per UAV-C, e.g. `10|01`.
    pub schedule: String,
    pub violations: usize,
    pub min_remaining_energy: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub best_schedule: Vec<Vec<bool>>,
    pub best: ScheduleScore,
    /// Every schedule in lexicographic order.
    pub table: Vec<ScheduleScore>,
}

impl OracleResult {
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        for row in &self.table {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn schedule_label(s: &[Vec<bool>]) -> String {
    s.iter()
        .map(|row| row.iter().map(|&b| if b { '1' } else { '0' }).collect::<String>())
        .collect::<Vec<_>>()
        .join("|")
}

/// Schedule number `code`; interval 0, UAV-C 0 is the most significant bit,
/// so increasing codes are lexicographically increasing schedules.
pub fn decode_schedule(code: u64, num_uav: usize, num_intervals: usize) -> Vec<Vec<bool>> {
    let bits = num_uav * num_intervals;
    (0..num_intervals)
        .map(|t| {
            (0..num_uav)
                .map(|j| (code >> (bits - 1 - (t * num_uav + j))) & 1 == 1)
                .collect()
        })
        .collect()
}

/// Score all `2^(J·T)` schedules and return the best; ties keep the
/// lexicographically smallest schedule.
pub fn enumerate_optimal(config: &ScenarioConfig, topology: &Topology, workload: &Workload) -> Result<OracleResult> {
    let (j, t) = (topology.num_uav(), config.num_intervals);
    let bits = j * t;
    if bits > 15 {
        return Err(Error::TooLarge(format!(
            "2^{bits} schedules for J={j}, T={t}; at most {MAX_SCHEDULES} are enumerated"
        )));
    }
    let mut table = Vec::with_capacity(1 << bits);
    let mut best: Option<(u64, ScheduleScore)> = None;
    for code in 0..(1u64 << bits) {
        let schedule = decode_schedule(code, j, t);
        let mut sim = Simulator::new(config, topology.clone(), workload.clone())?;
        let m = run_episode(&mut sim, &mut FixedSchedule(schedule.clone()))?;
        let row = ScheduleScore {
            schedule: schedule_label(&schedule),
            violations: m.violations,
            min_remaining_energy: m.min_remaining_energy,
            objective: m.objective,
        };
        if best.as_ref().is_none_or(|(_, b)| row.objective > b.objective) {
            best = Some((code, row.clone()));
        }
        table.push(row);
    }
    let (code, best) = best.expect("at least one schedule");
    Ok(OracleResult { best_schedule: decode_schedule(code, j, t), best, table })
}

/// Result of auditing one assignment.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MilpReport {
    /// Tasks whose route breaks flow conservation.
    pub flow_failures: Vec<usize>,
    pub constraint_violations: Vec<ConstraintViolation>,
}

impl MilpReport {
    pub fn is_feasible(&self) -> bool {
        self.flow_failures.is_empty() && self.constraint_violations.is_empty()
    }

    /// Unit flow conservation along each task's path.
    pub fn flow_ok(&self) -> bool {
        self.flow_failures.is_empty()
    }

    /// Each task processed by exactly one vertex.
    pub fn placement_ok(&self) -> bool {
        !self.constraint_violations.iter().any(|v| matches!(v, ConstraintViolation::PlacementCount { .. }))
    }

    /// Each task delivered to its processing vertex.
    pub fn delivery_ok(&self) -> bool {
        !self.constraint_violations.iter().any(|v| matches!(v, ConstraintViolation::Unreached { .. }))
    }

    /// No inactive UAV-C processes a task and none exceeds big-M.
    pub fn activation_ok(&self) -> bool {
        !self.constraint_violations.iter().any(|v| matches!(v, ConstraintViolation::Activation { .. }))
    }
}

/// Flow conservation per task plus placement and big-M activation
/// constraints. `big_m` defaults to the number of IoT devices.
pub fn check_milp_feasibility(
    assignment: &Assignment,
    tasks: &[Task],
    num_iot: usize,
    big_m: Option<f64>,
    sink: FlowSink,
) -> Result<MilpReport> {
    if assignment.routes.len() != tasks.len() {
        return Err(Error::Shape(format!(
            "{} routes for {} tasks",
            assignment.routes.len(),
            tasks.len()
        )));
    }
    // With several tasks per device the per-device bound scales accordingly.
    let per_device = tasks.len().div_ceil(num_iot.max(1)).max(1) as f64;
    let big_m = big_m.unwrap_or(num_iot as f64 * per_device);
    let flow_failures = tasks
        .iter()
        .zip(&assignment.routes)
        .enumerate()
        .filter(|(_, (task, route))| !check_flow_with_sink(route, task, sink))
        .map(|(k, _)| k)
        .collect();
    Ok(MilpReport { flow_failures, constraint_violations: validate_with_big_m(assignment, big_m) })
}

/// Straight-line reimplementations of the model's formulas.
pub mod reference {
    use crate::channel::{ChannelParams, Position};
    use crate::scenario::{ScenarioConfig, Task, Topology, Workload};

    pub fn los_probability(theta_deg: f64, a: f64, b: f64) -> f64 {
        let e = (-b * theta_deg + a * b).exp();
        1.0 / (1.0 + a * e)
    }

    pub fn path_loss_db(distance: f64, p_los: f64, c: &ChannelParams) -> f64 {
        let fspl = 20.0 * distance.log10() + 20.0 * c.carrier_hz.log10()
            + 20.0 * (4.0 * std::f64::consts::PI / c.light_speed).log10();
        fspl + c.eta_nlos_db + p_los * (c.eta_los_db - c.eta_nlos_db)
    }

    pub fn data_rate(loss_db: f64, tx_w: f64, bandwidth_hz: f64, noise_w: f64) -> f64 {
        let snr = tx_w * (-loss_db * std::f64::consts::LN_10 / 10.0).exp() / noise_w;
        bandwidth_hz * (1.0 + snr).ln() / std::f64::consts::LN_2
    }

    fn elevation_deg(a: &Position, b: &Position) -> f64 {
        let (dx, dy, dz) = (a.x - b.x, a.y - b.y, a.z - b.z);
        let d = (dx * dx + dy * dy + dz * dz).sqrt();
        (dz.abs() / d).asin() * 180.0 / std::f64::consts::PI
    }

    fn dist(a: &Position, b: &Position) -> f64 {
        ((a.x - b.x).powi(2) + (a.y - b.y).powi(2) + (a.z - b.z).powi(2)).sqrt()
    }

    /// Rate of one link; `relay` links between UAV-Cs are always LoS.
    pub fn link_rate(src: &Position, dst: &Position, tx_w: f64, relay: bool, share: usize, c: &ChannelParams) -> f64 {
        let p = if relay { 1.0 } else { los_probability(elevation_deg(src, dst), c.a, c.b) };
        data_rate(path_loss_db(dist(src, dst), p, c), tx_w, c.bandwidth_hz / share as f64, c.noise_power_w)
    }

    /// Battery after a sequence of on/off intervals; `None` once it would go negative.
    pub fn remaining_energy(battery: f64, propulsion: f64, comm: f64, processing: f64, on: &[bool]) -> Option<f64> {
        let mut r = battery;
        for &x in on {
            r -= propulsion + comm + if x { processing } else { 0.0 };
            if r < 0.0 {
                return None;
            }
        }
        Some(r)
    }

    pub fn objective(w: f64, theta_h: f64, theta_d: f64, min_r: f64, violations: usize) -> f64 {
        (w * min_r) / theta_h - ((1.0 - w) * violations as f64) / theta_d
    }

    /// A node of the reference graph: 0..I IoT, I..I+J UAV-C, I+J the MEC.
    pub type Node = usize;

    /// Per-task end-to-end delays given explicit paths (`path[0]` is the
    /// IoT node, the last node processes the task).
    pub fn task_delays(
        tasks: &[Task],
        paths: &[Vec<Node>],
        positions: &[Position],
        num_iot: usize,
        num_uav: usize,
        config: &ScenarioConfig,
    ) -> Vec<f64> {
        let c = &config.channel;
        let n = positions.len();
        let mut bits = vec![vec![0.0; n]; n];
        let mut load = vec![0.0; n];
        for (task, path) in tasks.iter().zip(paths) {
            for w in path.windows(2) {
                bits[w[0]][w[1]] += task.packet_bits;
            }
            load[*path.last().unwrap()] += task.load;
        }
        let mut delay_edge = vec![vec![0.0; n]; n];
        for g in 0..n {
            let fanout = bits[g].iter().filter(|&&b| b > 0.0).count();
            for h in 0..n {
                if bits[g][h] > 0.0 {
                    let tx = if g < num_iot { c.tx_power_iot_w } else { c.tx_power_uav_w };
                    let relay = g >= num_iot && h >= num_iot && h < num_iot + num_uav;
                    delay_edge[g][h] = bits[g][h] / link_rate(&positions[g], &positions[h], tx, relay, fanout, c);
                }
            }
        }
        paths
            .iter()
            .map(|p| {
                let last = *p.last().unwrap();
                let cap = if last == num_iot + num_uav { config.mec_capacity } else { config.uav_capacity };
                p.windows(2).map(|w| delay_edge[w[0]][w[1]]).sum::<f64>() + load[last] / cap
            })
            .collect()
    }

    /// `(violations, min remaining energy, objective)` of a whole schedule,
    /// routing tasks from scratch.
    pub fn evaluate_schedule(
        config: &ScenarioConfig,
        topology: &Topology,
        workload: &Workload,
        schedule: &[Vec<bool>],
    ) -> (usize, f64, f64) {
        let (ni, nj) = (topology.iot_positions.len(), topology.uav_routes.len());
        let mec = ni + nj;
        let mut violations = 0;
        for (t, on) in schedule.iter().enumerate().take(config.num_intervals) {
            let mut pos = topology.iot_positions.clone();
            pos.extend(topology.uav_routes.iter().map(|r| r[t]));
            pos.push(topology.mec_position);
            let tasks = &workload.intervals[t];
            let paths: Vec<Vec<Node>> = tasks
                .iter()
                .map(|task| {
                    let i = task.iot;
                    let near = (0..nj)
                        .min_by(|&a, &b| dist(&pos[i], &pos[ni + a]).total_cmp(&dist(&pos[i], &pos[ni + b])))
                        .unwrap();
                    if on[near] {
                        return vec![i, ni + near];
                    }
                    let relay = (0..nj)
                        .filter(|&k| on[k] && k != near && config.max_relay_hops > 0)
                        .min_by(|&a, &b| {
                            dist(&pos[ni + near], &pos[ni + a]).total_cmp(&dist(&pos[ni + near], &pos[ni + b]))
                        });
                    match relay {
                        Some(k) => vec![i, ni + near, ni + k],
                        None => vec![i, ni + near, mec],
                    }
                })
                .collect();
            let d = task_delays(tasks, &paths, &pos, ni, nj, config);
            violations += tasks.iter().zip(&d).filter(|(task, &d)| d > task.deadline_s).count();
        }
        let e = &config.energy;
        let min_r = (0..nj)
            .map(|j| {
                let on: Vec<bool> = schedule.iter().map(|row| row[j]).collect();
                remaining_energy(e.battery_wh, e.propulsion_wh, e.comm_wh, e.processing_wh, &on).unwrap_or(0.0)
            })
            .fold(f64::INFINITY, f64::min);
        let w = config.objective_weights(workload.total_tasks());
        (violations, min_r, objective(w.w, w.theta_h, w.theta_d, min_r, violations))
    }
}
