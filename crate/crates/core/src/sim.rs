//! Interval-by-interval episode simulation.
//!
//! At every interval the controller sees the graph observation, picks an
//! on/off bit per UAV-C, and the simulator routes the interval's tasks,
//! accounts delays and violations, drains batteries and pays the reward.
//! Depleted UAV-Cs are forced off whatever the controller requests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::channel::{link_rate, LinkKind, Position};
use crate::energy::{self, UavEnergyState};
use crate::error::{Error, Result};
use crate::gnn::{EdgeSet, GraphFeatures, Matrix, FEATURE_WIDTH};
use crate::routing::{compute_delays, route_tasks, Capacities, DelayReport};
use crate::scenario::{build_topology, generate_tasks, ScenarioConfig, Task, Topology, Workload};

/// Divisors that bring raw observations to order one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeatureScale {
    /// Bits an IoT device can emit in one interval.
    pub bits: f64,
    /// Load an IoT device can emit in one interval.
    pub load: f64,
    /// Seconds; the loosest deadline.
    pub time: f64,
    /// Active intervals of energy surplus that map to 1.
    pub surplus: f64,
    /// Reference processing capacity (the MEC's).
    pub capacity: f64,
    pub width: f64,
    pub height: f64,
}

impl FeatureScale {
    pub fn for_config(config: &ScenarioConfig) -> Self {
        let max = |f: fn(&crate::scenario::TaskType) -> f64| {
            config.task_types.iter().map(f).fold(0.0, f64::max)
        };
        let cap = config.max_tasks_per_interval.max(1) as f64;
        Self {
            bits: cap * max(|t| t.packet_bits),
            load: cap * max(|t| t.mean_load),
            time: max(|t| t.deadline_s),
            surplus: 4.0,
            capacity: config.mec_capacity,
            width: config.field_width_m,
            height: config.field_height_m,
        }
    }
}

/// Outcome of one interval.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    /// Activations after forcing depleted UAV-Cs off.
    pub applied: Vec<bool>,
    pub reward: f64,
    pub severity: f64,
    pub tasks: usize,
    pub violations: usize,
    pub delays: DelayReport,
}

/// Totals of a finished (or running) episode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpisodeMetrics {
    pub tasks: usize,
    pub violations: usize,
    pub min_remaining_energy: f64,
    pub objective: f64,
    pub total_reward: f64,
    /// Applied activations, `schedule[t][j]`.
    #[serde(skip)]
    pub schedule: Vec<Vec<bool>>,
}

impl EpisodeMetrics {
    pub fn violation_rate(&self) -> f64 {
        if self.tasks == 0 {
            0.0
        } else {
            self.violations as f64 / self.tasks as f64
        }
    }
}

/// A single episode over a fixed topology and workload.
#[derive(Debug, Clone)]
pub struct Simulator {
    config: ScenarioConfig,
    topology: Topology,
    workload: Workload,
    capacities: Capacities,
    scale: FeatureScale,
    states: Vec<UavEnergyState>,
    t: usize,
    violations: usize,
    total_reward: f64,
    schedule: Vec<Vec<bool>>,
}

impl Simulator {
    pub fn new(config: &ScenarioConfig, topology: Topology, workload: Workload) -> Result<Self> {
        config.validate()?;
        if topology.num_iot() != config.num_iot {
            return Err(Error::Shape(format!(
                "topology has {} IoT devices, config {}",
                topology.num_iot(),
                config.num_iot
            )));
        }
        if topology.num_intervals < config.num_intervals || workload.intervals.len() < config.num_intervals {
            return Err(Error::Shape("topology or workload shorter than the episode".into()));
        }
        if let Some(task) = workload.iter().find(|t| t.iot >= config.num_iot) {
            return Err(Error::OutOfRange { what: "IoT device", index: task.iot, len: config.num_iot });
        }
        let j = topology.num_uav();
        Ok(Self {
            capacities: Capacities { uav: config.uav_capacity, mec: config.mec_capacity },
            scale: FeatureScale::for_config(config),
            states: vec![config.initial_energy(); j],
            config: config.clone(),
            topology,
            workload,
            t: 0,
            violations: 0,
            total_reward: 0.0,
            schedule: Vec::new(),
        })
    }

    /// Topology and workload drawn from the config with `seed`.
    pub fn from_config(config: &ScenarioConfig, seed: u64) -> Result<Self> {
        let topology = build_topology(config)?;
        let workload = generate_tasks(config, seed)?;
        Self::new(config, topology, workload)
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn workload(&self) -> &Workload {
        &self.workload
    }

    pub fn energy(&self) -> &[UavEnergyState] {
        &self.states
    }

    pub fn num_uav(&self) -> usize {
        self.topology.num_uav()
    }

    pub fn interval(&self) -> usize {
        self.t
    }

    pub fn is_done(&self) -> bool {
        self.t >= self.config.num_intervals
    }

    pub fn current_tasks(&self) -> &[Task] {
        self.workload.interval(self.t)
    }

    /// Graph observation of the current interval.
    pub fn observe(&self) -> Result<GraphFeatures> {
        if self.is_done() {
            return Err(Error::Domain("episode is over".into()));
        }
        observe(
            &self.topology,
            self.current_tasks(),
            &self.states,
            self.t,
            &self.config,
            &self.scale,
        )
    }

    /// Apply `requested` activations for the current interval.
    pub fn step(&mut self, requested: &[bool]) -> Result<StepOutcome> {
        if self.is_done() {
            return Err(Error::Domain("episode is over".into()));
        }
        let j = self.num_uav();
        if requested.len() != j {
            return Err(Error::Shape(format!("{} actions for {j} UAV-Cs", requested.len())));
        }
        let applied: Vec<bool> = requested
            .iter()
            .zip(&self.states)
            .map(|(&a, s)| a && !s.depleted)
            .collect();
        let t = self.t;
        let tasks = self.workload.interval(t);
        let assignment = route_tasks(tasks, &self.topology, &applied, t, self.config.max_relay_hops)?;
        let delays = compute_delays(&assignment, tasks, &self.topology, &self.config.channel, &self.capacities)?;
        let violations = delays.violation_count();
        let severity = energy::severity(&self.states, &applied, self.config.severity)?;
        let reward = energy::reward(severity, violations, &self.config.reward_weights(tasks.len()));

        for (s, &a) in self.states.iter_mut().zip(&applied) {
            if !s.depleted {
                *s = s.step(a)?;
            }
        }
        self.t += 1;
        self.violations += violations;
        self.total_reward += reward;
        self.schedule.push(applied.clone());
        Ok(StepOutcome { applied, reward, severity, tasks: tasks.len(), violations, delays })
    }

    pub fn metrics(&self) -> EpisodeMetrics {
        let tasks: usize = (0..self.t).map(|t| self.workload.interval(t).len()).sum();
        let weights = self.config.objective_weights(self.workload.total_tasks());
        let min_r = energy::min_remaining(&self.states);
        EpisodeMetrics {
            tasks,
            violations: self.violations,
            min_remaining_energy: min_r,
            objective: energy::objective_from_parts(min_r, self.violations, &weights),
            total_reward: self.total_reward,
            schedule: self.schedule.clone(),
        }
    }
}

/// Build the graph observation for interval `t`.
pub fn observe(
    topology: &Topology,
    tasks: &[Task],
    states: &[UavEnergyState],
    t: usize,
    config: &ScenarioConfig,
    scale: &FeatureScale,
) -> Result<GraphFeatures> {
    let (ni, nj) = (topology.num_iot(), topology.num_uav());
    let ch = &config.channel;
    let mut bits = vec![0.0; ni];
    let mut load = vec![0.0; ni];
    let mut deadline = vec![f64::INFINITY; ni];
    for task in tasks {
        let i = task.iot;
        if i >= ni {
            return Err(Error::OutOfRange { what: "IoT device", index: i, len: ni });
        }
        bits[i] += task.packet_bits;
        load[i] += task.load;
        deadline[i] = deadline[i].min(task.deadline_s);
    }

    let uav_pos: Vec<Position> = (0..nj).map(|j| topology.uav_position(j, t)).collect::<Result<_>>()?;
    let xy = |p: &Position| [p.x / scale.width, p.y / scale.height];

    let mut iot = Matrix::zeros(ni, FEATURE_WIDTH);
    let mut iot_uav = EdgeSet::empty(FEATURE_WIDTH);
    let mut near_bits = vec![0.0; nj];
    let mut near_load = vec![0.0; nj];
    for i in 0..ni {
        if bits[i] == 0.0 {
            continue;
        }
        iot.row_mut(i).copy_from_slice(&[
            bits[i] / scale.bits,
            load[i] / scale.load,
            deadline[i] / scale.time,
        ]);
        let pos = topology.iot_position(i)?;
        let j = topology.nearest_uav(&pos, t)?;
        near_bits[j] += bits[i];
        near_load[j] += load[i];
        let rate = link_rate(&pos, &uav_pos[j], LinkKind::IotToUav, 1, ch)?;
        let [x, y] = xy(&uav_pos[j]);
        iot_uav.push(i, j, &[bits[i] / rate / scale.time, x, y]);
    }

    // Energy enters as the surplus over the weakest UAV-C, counted in active
    // intervals, so that the one the severity term watches stands out.
    let floor = energy::min_remaining(states);
    let mut uav = Matrix::zeros(nj, FEATURE_WIDTH);
    for j in 0..nj {
        let per_interval = states[j].processing_per_active_interval.max(f64::EPSILON);
        uav.row_mut(j).copy_from_slice(&[
            (states[j].remaining - floor) / per_interval / scale.surplus,
            near_load[j] / config.uav_capacity / scale.time,
            config.uav_capacity / scale.capacity,
        ]);
    }

    let mut uav_uav = EdgeSet::empty(FEATURE_WIDTH);
    for s in 0..nj {
        for d in 0..nj {
            if s == d {
                continue;
            }
            let rate = link_rate(&uav_pos[s], &uav_pos[d], LinkKind::UavToUav, 1, ch)?;
            let [x, y] = xy(&uav_pos[d]);
            uav_uav.push(s, d, &[near_bits[s] / rate / scale.time, x, y]);
        }
    }

    let mut uav_mec = EdgeSet::empty(FEATURE_WIDTH);
    let mut mec_uav = EdgeSet::empty(FEATURE_WIDTH);
    for j in 0..nj {
        let rate = link_rate(&uav_pos[j], &topology.mec_position, LinkKind::UavToMec, 1, ch)?;
        let [x, y] = xy(&uav_pos[j]);
        let f = [near_bits[j] / rate / scale.time, x, y];
        uav_mec.push(j, 0, &f);
        mec_uav.push(0, j, &f);
    }

    let total_load: f64 = load.iter().sum();
    let mut mec = Matrix::zeros(1, FEATURE_WIDTH);
    mec.set(0, 0, total_load / config.mec_capacity / scale.time);

    Ok(GraphFeatures { iot, uav, mec, iot_uav, uav_uav, uav_mec, mec_uav })
}

/// A controller choosing activations from the simulator state.
pub trait Policy {
    fn name(&self) -> String;
    fn act(&mut self, sim: &Simulator) -> Result<Vec<bool>>;
}

/// Every UAV-C on in every interval.
#[derive(Debug, Clone, Copy, Default)]
pub struct HFc;

impl Policy for HFc {
    fn name(&self) -> String {
        "hfc".into()
    }

    fn act(&mut self, sim: &Simulator) -> Result<Vec<bool>> {
        Ok(vec![true; sim.num_uav()])
    }
}

/// Exactly one UAV-C on, cycling: unit `t mod J` at interval `t`.
#[derive(Debug, Clone, Copy, Default)]
pub struct HRr;

impl Policy for HRr {
    fn name(&self) -> String {
        "hrr".into()
    }

    fn act(&mut self, sim: &Simulator) -> Result<Vec<bool>> {
        let j = sim.num_uav();
        let on = sim.interval() % j;
        Ok((0..j).map(|k| k == on).collect())
    }
}

/// Each bit an independent fair coin.
#[derive(Debug, Clone)]
pub struct RandomPolicy {
    rng: ChaCha8Rng,
}

impl RandomPolicy {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }
}

impl Policy for RandomPolicy {
    fn name(&self) -> String {
        "random".into()
    }

    fn act(&mut self, sim: &Simulator) -> Result<Vec<bool>> {
        Ok((0..sim.num_uav()).map(|_| self.rng.random_bool(0.5)).collect())
    }
}

/// Replays a precomputed schedule, `schedule[t][j]`.
#[derive(Debug, Clone)]
pub struct FixedSchedule(pub Vec<Vec<bool>>);

impl Policy for FixedSchedule {
    fn name(&self) -> String {
        "fixed".into()
    }

    fn act(&mut self, sim: &Simulator) -> Result<Vec<bool>> {
        self.0
            .get(sim.interval())
            .cloned()
            .ok_or(Error::OutOfRange { what: "schedule interval", index: sim.interval(), len: self.0.len() })
    }
}

/// Run `policy` until the episode ends.
pub fn run_episode(sim: &mut Simulator, policy: &mut dyn Policy) -> Result<EpisodeMetrics> {
    while !sim.is_done() {
        let a = policy.act(sim)?;
        sim.step(&a)?;
    }
    Ok(sim.metrics())
}

/// Convenience: fresh episode from config and workload seed.
pub fn evaluate(config: &ScenarioConfig, seed: u64, policy: &mut dyn Policy) -> Result<EpisodeMetrics> {
    let mut sim = Simulator::from_config(config, seed)?;
    run_episode(&mut sim, policy)
}
