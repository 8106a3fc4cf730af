//! Scenario configuration, field layout, UAV-C routes and task workloads.
//!
//! IoT devices sit on a uniform grid over a rectangular field. The field is
//! partitioned into one sub-rectangle per UAV-C and each UAV-C patrols a
//! four-waypoint loop inside its cell at a fixed altitude, advancing one
//! waypoint per interval. The MEC sits on the ground at the middle of the
//! southern field edge.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Poisson};
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelParams, Position};
use crate::energy::{ObjectiveWeights, SeverityMode, UavEnergyState};
use crate::error::{Error, Result};

/// Bits in one KByte.
pub const KBYTE_BITS: f64 = 8.0 * 1024.0;

/// One of the task classes an IoT device can emit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskType {
    pub deadline_s: f64,
    /// Mean processing load, seconds at unit capacity.
    pub mean_load: f64,
    pub packet_bits: f64,
}

/// A task `F_{i,t}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub iot: usize,
    pub interval: usize,
    /// Index into the scenario's task types.
    pub kind: usize,
    pub packet_bits: f64,
    /// Seconds of work at unit processing capacity.
    pub load: f64,
    pub deadline_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RouteKind {
    /// Four-waypoint loop inside the UAV-C's cell.
    Loop,
    /// Hover at the cell centre.
    Hover,
}

/// Per-interval energy draws and battery size, Wh.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyConfig {
    pub battery_wh: f64,
    pub propulsion_wh: f64,
    pub comm_wh: f64,
    pub processing_wh: f64,
}

impl Default for EnergyConfig {
    fn default() -> Self {
        Self {
            battery_wh: 100.0,
            propulsion_wh: 2.0,
            comm_wh: 0.0,
            processing_wh: 3.0,
        }
    }
}

/// Weight and normalisers for the objective or the reward. A missing
/// normaliser falls back to a scenario-derived value (see
/// [`ScenarioConfig::objective_weights`] and [`ScenarioConfig::reward_weights`]).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightSpec {
    pub w: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_d: Option<f64>,
}

/// Everything needed to build a topology and a workload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub num_iot: usize,
    pub num_uav: usize,
    pub num_intervals: usize,
    pub interval_s: f64,
    pub field_width_m: f64,
    pub field_height_m: f64,
    pub altitude_m: f64,
    pub route: RouteKind,
    pub channel: ChannelParams,
    pub task_types: Vec<TaskType>,
    /// Poisson arrival rate per IoT device, tasks/s.
    pub arrival_rate_hz: f64,
    pub max_tasks_per_interval: usize,
    pub energy: EnergyConfig,
    /// Processing capacity of every UAV-C, load-seconds per second.
    pub uav_capacity: f64,
    pub mec_capacity: f64,
    pub objective: WeightSpec,
    pub reward: WeightSpec,
    pub severity: SeverityMode,
    pub max_relay_hops: usize,
    pub rng_seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let packet = 32.0 * KBYTE_BITS;
        Self {
            num_iot: 24,
            num_uav: 8,
            num_intervals: 18,
            interval_s: 300.0,
            field_width_m: 400.0,
            field_height_m: 400.0,
            altitude_m: 5.0,
            route: RouteKind::Loop,
            channel: ChannelParams::default(),
            task_types: vec![
                TaskType { deadline_s: 6.0, mean_load: 0.6, packet_bits: packet },
                TaskType { deadline_s: 10.0, mean_load: 1.0, packet_bits: packet },
                TaskType { deadline_s: 15.0, mean_load: 1.5, packet_bits: packet },
            ],
            arrival_rate_hz: 2.0,
            max_tasks_per_interval: 8,
            energy: EnergyConfig::default(),
            uav_capacity: 8.0,
            mec_capacity: 16.0,
            objective: WeightSpec { w: 0.5, theta_h: None, theta_d: None },
            reward: WeightSpec { w: 0.5, theta_h: Some(1.0), theta_d: None },
            severity: SeverityMode::Penalty,
            max_relay_hops: 1,
            rng_seed: 0,
        }
    }
}

impl ScenarioConfig {
    /// The two-UAV, four-IoT, four-interval instance used for exact
    /// comparisons against enumeration. One task type, one task per IoT per
    /// interval. A single active UAV-C can serve every task in time while
    /// the MEC alone cannot.
    pub fn tiny() -> Self {
        Self {
            num_iot: 4,
            num_uav: 2,
            num_intervals: 4,
            field_width_m: 200.0,
            field_height_m: 100.0,
            task_types: vec![TaskType {
                deadline_s: 6.0,
                mean_load: 1.0,
                packet_bits: 32.0 * KBYTE_BITS,
            }],
            max_tasks_per_interval: 1,
            uav_capacity: 2.0,
            mec_capacity: 0.5,
            ..Self::default()
        }
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let config: Self = serde_json::from_str(&text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json_pretty(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_iot == 0 || self.num_uav == 0 || self.num_intervals == 0 {
            return Err(Error::Config(format!(
                "counts must be positive (I={}, J={}, T={})",
                self.num_iot, self.num_uav, self.num_intervals
            )));
        }
        let positive = [
            ("interval_s", self.interval_s),
            ("field_width_m", self.field_width_m),
            ("field_height_m", self.field_height_m),
            ("uav_capacity", self.uav_capacity),
            ("mec_capacity", self.mec_capacity),
            ("energy.battery_wh", self.energy.battery_wh),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        let non_negative = [
            ("altitude_m", self.altitude_m),
            ("arrival_rate_hz", self.arrival_rate_hz),
            ("energy.propulsion_wh", self.energy.propulsion_wh),
            ("energy.comm_wh", self.energy.comm_wh),
            ("energy.processing_wh", self.energy.processing_wh),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be non-negative, got {v}")));
            }
        }
        if self.task_types.is_empty() {
            return Err(Error::Config("at least one task type is required".into()));
        }
        for (k, tt) in self.task_types.iter().enumerate() {
            if !(tt.deadline_s > 0.0 && tt.mean_load > 0.0 && tt.packet_bits > 0.0) {
                return Err(Error::Config(format!("task type {k} must have positive fields")));
            }
        }
        for (name, spec) in [("objective", &self.objective), ("reward", &self.reward)] {
            if !(0.0..=1.0).contains(&spec.w) {
                return Err(Error::Config(format!("{name}.w must lie in [0, 1], got {}", spec.w)));
            }
            for v in [spec.theta_h, spec.theta_d].into_iter().flatten() {
                if !(v > 0.0) {
                    return Err(Error::Config(format!("{name} normalisers must be positive")));
                }
            }
        }
        self.channel.validate()
    }

    /// Weights of the episode objective. Θ^H defaults to the battery
    /// capacity and Θ^D to the number of tasks in the episode.
    pub fn objective_weights(&self, episode_tasks: usize) -> ObjectiveWeights {
        ObjectiveWeights {
            w: self.objective.w,
            theta_h: self.objective.theta_h.unwrap_or(self.energy.battery_wh),
            theta_d: self.objective.theta_d.unwrap_or(episode_tasks.max(1) as f64),
        }
    }

    /// Weights of the per-interval reward. Θ^H defaults to the battery
    /// capacity and Θ^D to the number of tasks in the interval.
    pub fn reward_weights(&self, interval_tasks: usize) -> ObjectiveWeights {
        ObjectiveWeights {
            w: self.reward.w,
            theta_h: self.reward.theta_h.unwrap_or(self.energy.battery_wh),
            theta_d: self.reward.theta_d.unwrap_or(interval_tasks.max(1) as f64),
        }
    }

    pub fn initial_energy(&self) -> UavEnergyState {
        UavEnergyState::full(
            self.energy.battery_wh,
            self.energy.propulsion_wh,
            self.energy.comm_wh,
            self.energy.processing_wh,
        )
    }

    /// Multiply every task type's mean load.
    pub fn scale_loads(&mut self, factor: f64) {
        for tt in &mut self.task_types {
            tt.mean_load *= factor;
        }
    }

    /// Multiply every task type's packet size.
    pub fn scale_packets(&mut self, factor: f64) {
        for tt in &mut self.task_types {
            tt.packet_bits *= factor;
        }
    }
}

/// Tasks of one episode, grouped by interval and ordered by IoT index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Workload {
    pub intervals: Vec<Vec<Task>>,
}

impl Workload {
    pub fn interval(&self, t: usize) -> &[Task] {
        self.intervals.get(t).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn total_tasks(&self) -> usize {
        self.intervals.iter().map(Vec::len).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Task> {
        self.intervals.iter().flatten()
    }
}

/// Draw a workload. Each IoT device's task count per interval is a Poisson
/// draw with mean `arrival_rate_hz · interval_s`, capped at
/// `max_tasks_per_interval`. Types are uniform; loads are exponential with
/// the type's mean.
pub fn generate_tasks(config: &ScenarioConfig, rng_seed: u64) -> Result<Workload> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mean_arrivals = config.arrival_rate_hz * config.interval_s;
    let arrivals = if mean_arrivals > 0.0 {
        Some(Poisson::new(mean_arrivals).map_err(|e| Error::Config(e.to_string()))?)
    } else {
        None
    };
    let loads = config
        .task_types
        .iter()
        .map(|tt| Exp::new(1.0 / tt.mean_load).map_err(|e| Error::Config(e.to_string())))
        .collect::<Result<Vec<_>>>()?;

    let mut intervals = Vec::with_capacity(config.num_intervals);
    for t in 0..config.num_intervals {
        let mut tasks = Vec::new();
        for i in 0..config.num_iot {
            let count = match &arrivals {
                Some(p) => (p.sample(&mut rng) as usize).min(config.max_tasks_per_interval),
                None => 0,
            };
            for _ in 0..count {
                let kind = rng.random_range(0..config.task_types.len());
                let tt = &config.task_types[kind];
                tasks.push(Task {
                    iot: i,
                    interval: t,
                    kind,
                    packet_bits: tt.packet_bits,
                    load: loads[kind].sample(&mut rng),
                    deadline_s: tt.deadline_s,
                });
            }
        }
        intervals.push(tasks);
    }
    Ok(Workload { intervals })
}

/// Vertex positions for every interval of an episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    pub iot_positions: Vec<Position>,
    /// `uav_routes[j][t]` is UAV-C `j`'s waypoint during interval `t`.
    pub uav_routes: Vec<Vec<Position>>,
    pub mec_position: Position,
    pub num_intervals: usize,
    pub interval_s: f64,
}

/// Factor `n` into `cols × rows` with the aspect ratio closest to the
/// field's, preferring more columns on ties.
fn grid_dims(n: usize, width: f64, height: f64) -> (usize, usize) {
    let target = (width / height).ln();
    let mut best = (n, 1);
    let mut best_err = f64::INFINITY;
    for rows in 1..=n {
        if n % rows != 0 {
            continue;
        }
        let cols = n / rows;
        let err = ((cols as f64 / rows as f64).ln() - target).abs();
        if err < best_err - 1e-12 {
            best = (cols, rows);
            best_err = err;
        }
    }
    best
}

/// Lay out IoT devices and UAV-C routes.
pub fn build_topology(config: &ScenarioConfig) -> Result<Topology> {
    config.validate()?;
    let (w, h) = (config.field_width_m, config.field_height_m);

    let (icols, irows) = grid_dims(config.num_iot, w, h);
    let (dx, dy) = (w / icols as f64, h / irows as f64);
    if dx < 1.0 || dy < 1.0 {
        return Err(Error::Config(format!(
            "field {w}x{h} m too small for {} IoT devices",
            config.num_iot
        )));
    }
    let mut iot_positions = Vec::with_capacity(config.num_iot);
    for r in 0..irows {
        for c in 0..icols {
            iot_positions.push(Position::new(
                (c as f64 + 0.5) * dx,
                (r as f64 + 0.5) * dy,
                0.0,
            ));
        }
    }

    let (ucols, urows) = grid_dims(config.num_uav, w, h);
    let (cw, ch) = (w / ucols as f64, h / urows as f64);
    if cw < 2.0 || ch < 2.0 {
        return Err(Error::Config(format!(
            "field {w}x{h} m too small for {} UAV-C cells",
            config.num_uav
        )));
    }
    let z = config.altitude_m;
    let mut uav_routes = Vec::with_capacity(config.num_uav);
    for r in 0..urows {
        for c in 0..ucols {
            let (x0, y0) = (c as f64 * cw, r as f64 * ch);
            let waypoints = match config.route {
                RouteKind::Loop => vec![
                    Position::new(x0 + 0.25 * cw, y0 + 0.25 * ch, z),
                    Position::new(x0 + 0.75 * cw, y0 + 0.25 * ch, z),
                    Position::new(x0 + 0.75 * cw, y0 + 0.75 * ch, z),
                    Position::new(x0 + 0.25 * cw, y0 + 0.75 * ch, z),
                ],
                RouteKind::Hover => vec![Position::new(x0 + 0.5 * cw, y0 + 0.5 * ch, z)],
            };
            uav_routes.push(
                (0..config.num_intervals)
                    .map(|t| waypoints[t % waypoints.len()])
                    .collect(),
            );
        }
    }

    Ok(Topology {
        iot_positions,
        uav_routes,
        mec_position: Position::new(0.5 * w, 0.0, 0.0),
        num_intervals: config.num_intervals,
        interval_s: config.interval_s,
    })
}

impl Topology {
    pub fn num_iot(&self) -> usize {
        self.iot_positions.len()
    }

    pub fn num_uav(&self) -> usize {
        self.uav_routes.len()
    }

    pub fn uav_position(&self, j: usize, t: usize) -> Result<Position> {
        let route = self.uav_routes.get(j).ok_or(Error::OutOfRange {
            what: "UAV-C",
            index: j,
            len: self.uav_routes.len(),
        })?;
        route.get(t).copied().ok_or(Error::OutOfRange {
            what: "interval",
            index: t,
            len: route.len(),
        })
    }

    pub fn iot_position(&self, i: usize) -> Result<Position> {
        self.iot_positions.get(i).copied().ok_or(Error::OutOfRange {
            what: "IoT device",
            index: i,
            len: self.iot_positions.len(),
        })
    }

    /// Nearest UAV-C to `pos` during interval `t`; ties go to the smaller index.
    pub fn nearest_uav(&self, pos: &Position, t: usize) -> Result<usize> {
        let mut best = None;
        let mut best_d = f64::INFINITY;
        for j in 0..self.num_uav() {
            let d = pos.distance(&self.uav_position(j, t)?);
            if d < best_d {
                best_d = d;
                best = Some(j);
            }
        }
        best.ok_or_else(|| Error::Config("topology has no UAV-C".into()))
    }

    /// Copy of the topology with the listed UAV-Cs removed. Remaining UAV-Cs
    /// keep their relative order.
    pub fn without_uavs(&self, removed: &[usize]) -> Result<Topology> {
        for &j in removed {
            if j >= self.num_uav() {
                return Err(Error::OutOfRange {
                    what: "UAV-C",
                    index: j,
                    len: self.num_uav(),
                });
            }
        }
        let uav_routes: Vec<_> = self
            .uav_routes
            .iter()
            .enumerate()
            .filter(|(j, _)| !removed.contains(j))
            .map(|(_, r)| r.clone())
            .collect();
        if uav_routes.is_empty() {
            return Err(Error::Config("cannot remove every UAV-C".into()));
        }
        Ok(Topology { uav_routes, ..self.clone() })
    }
}
