//! Deep Q-learning over per-UAV-C factorised action values.
//!
//! Each UAV-C `j` owns the row `Q_j(s, ·)` of the network output. All rows
//! share the interval reward; the target for the taken action of row `j` is
//! `r + γ · max_a Q̄_j(s', a)` with the target network `Q̄`, or just `r` at
//! the end of an episode.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gnn::Matrix;
use crate::rl::qnet::QNetwork;
use crate::rl::replay::{ReplayBuffer, Transition};
use crate::scenario::{build_topology, generate_tasks, ScenarioConfig};
use crate::sim::{run_episode, Policy, Simulator};

/// Greedy per-row argmax with probability `1 - ε`, a uniform bit otherwise.
/// Ties go to "off".
pub fn select_actions(q: &Matrix, epsilon: f64, rng: &mut impl Rng) -> Vec<bool> {
    (0..q.rows)
        .map(|j| {
            if epsilon > 0.0 && rng.random::<f64>() < epsilon {
                rng.random_bool(0.5)
            } else {
                q.get(j, 1) > q.get(j, 0)
            }
        })
        .collect()
}

/// Per-UAV-C TD targets of one transition.
pub fn td_targets<N: QNetwork>(target: &N, t: &Transition, gamma: f64) -> Result<Vec<f64>> {
    let j = t.actions.len();
    match &t.next_state {
        None => Ok(vec![t.reward; j]),
        Some(next) => {
            let q = target.q_values(next)?;
            if q.rows != j {
                return Err(Error::Shape(format!("next state has {} UAV-Cs, actions {j}", q.rows)));
            }
            Ok((0..j).map(|k| t.reward + gamma * q.get(k, 0).max(q.get(k, 1))).collect())
        }
    }
}

/// Adam with bias correction.
#[derive(Debug, Clone)]
pub struct Adam {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    pub fn new(num_params: usize) -> Self {
        Self { beta1: 0.9, beta2: 0.999, eps: 1e-8, m: vec![0.0; num_params], v: vec![0.0; num_params], t: 0 }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t);
        let c2 = 1.0 - self.beta2.powi(self.t);
        for k in 0..params.len() {
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * grad[k];
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * grad[k] * grad[k];
            params[k] -= lr * (self.m[k] / c1) / ((self.v[k] / c2).sqrt() + self.eps);
        }
    }
}

/// One gradient step on the mean squared TD error of the taken actions.
/// Returns the loss before the update.
pub fn train_step<N: QNetwork>(
    online: &mut N,
    target: &N,
    batch: &[&Transition],
    gamma: f64,
    adam: &mut Adam,
    lr: f64,
) -> Result<f64> {
    let mut grad = vec![0.0; online.num_params()];
    let mut loss = 0.0;
    let mut count = 0usize;
    let mut max_td: f64 = 0.0;
    let mut pending = Vec::with_capacity(batch.len());
    for t in batch {
        let y = td_targets(target, t, gamma)?;
        let (q, cache) = online.forward_cached(&t.state)?;
        let mut d_q = Matrix::zeros(q.rows, 2);
        for (j, &a) in t.actions.iter().enumerate() {
            let col = usize::from(a);
            let td = q.get(j, col) - y[j];
            max_td = max_td.max(td.abs());
            loss += td * td;
            d_q.set(j, col, td);
            count += 1;
        }
        pending.push((cache, d_q));
    }
    if count == 0 {
        return Ok(0.0);
    }
    let n = count as f64;
    loss /= n;
    if !loss.is_finite() {
        return Err(Error::NonFiniteLoss { loss, batch: batch.len(), max_td });
    }
    for (cache, mut d_q) in pending {
        for v in &mut d_q.data {
            *v *= 2.0 / n;
        }
        online.backward(&cache, &d_q, &mut grad)?;
    }
    let mut params = online.params();
    adam.step(&mut params, &grad, lr);
    online.set_params(&params)?;
    Ok(loss)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub episodes: usize,
    pub gamma: f64,
    pub batch_size: usize,
    pub replay_capacity: usize,
    pub lr: f64,
    /// The learning rate halves after every this fraction of the episodes.
    pub lr_halve_fraction: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Per-episode multiplicative decay.
    pub epsilon_decay: f64,
    /// Gradient steps between target-network copies.
    pub target_sync_every: usize,
    /// Environment steps between gradient steps.
    pub train_every: usize,
    /// Draw a fresh workload each episode instead of replaying the
    /// scenario's own (`rng_seed`) workload.
    pub resample_workload: bool,
    /// Every this many episodes, play one greedy episode on the scenario's
    /// workload and keep the parameters with the highest total reward.
    /// Zero returns the final parameters instead.
    pub select_every: usize,
    pub seed: u64,
}

fn decay_to(end: f64, episodes: f64) -> f64 {
    end.powf(1.0 / episodes.max(1.0))
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            episodes: 3000,
            gamma: 0.95,
            batch_size: 128,
            replay_capacity: 10_000,
            lr: 1e-3,
            lr_halve_fraction: 0.25,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            epsilon_decay: 0.999,
            target_sync_every: 50,
            train_every: 1,
            resample_workload: true,
            select_every: 0,
            seed: 0,
        }
    }
}

impl TrainConfig {
    /// A short budget for the default scenario: small batches every second
    /// step, exploration annealed over the first 70% of episodes, and the
    /// best greedy snapshot kept every 10 episodes.
    pub fn quick(episodes: usize, seed: u64) -> Self {
        Self {
            episodes,
            batch_size: 32,
            train_every: 2,
            epsilon_decay: decay_to(0.05, 0.7 * episodes as f64),
            select_every: 10,
            seed,
            ..Self::default()
        }
    }

    /// Recipe for the two-UAV instance, which is trained on its single
    /// fixed workload.
    pub fn tiny(episodes: usize, seed: u64) -> Self {
        Self {
            episodes,
            batch_size: 32,
            replay_capacity: 2000,
            epsilon_decay: decay_to(0.05, 0.7 * episodes as f64),
            target_sync_every: 20,
            resample_workload: false,
            select_every: 25,
            seed,
            ..Self::default()
        }
    }

    pub fn epsilon(&self, episode: usize) -> f64 {
        (self.epsilon_start * self.epsilon_decay.powi(episode as i32)).max(self.epsilon_end)
    }

    pub fn learning_rate(&self, episode: usize) -> f64 {
        let period = ((self.episodes as f64 * self.lr_halve_fraction).ceil() as usize).max(1);
        self.lr * 0.5f64.powi((episode / period) as i32)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = (0.0..=1.0).contains(&self.gamma)
            && self.batch_size > 0
            && self.replay_capacity >= self.batch_size
            && self.lr > 0.0
            && self.lr_halve_fraction > 0.0
            && (0.0..=1.0).contains(&self.epsilon_end)
            && self.epsilon_end <= self.epsilon_start
            && self.epsilon_start <= 1.0
            && self.epsilon_decay > 0.0
            && self.epsilon_decay <= 1.0
            && self.target_sync_every > 0
            && self.train_every > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid training config {self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub episode: usize,
    pub total_reward: f64,
    pub violations: usize,
    pub min_remaining_energy: f64,
    pub epsilon: f64,
    pub lr: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingLog {
    pub episodes: Vec<EpisodeLog>,
    pub target_syncs: usize,
    pub gradient_steps: usize,
    /// Episode after which the returned parameters were selected, with
    /// their greedy total reward.
    pub selected: Option<(usize, f64)>,
}

impl TrainingLog {
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        for e in &self.episodes {
            w.serialize(e)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Train `net` on episodes of `scenario`. Returns the online network.
pub fn train<N: QNetwork>(mut net: N, scenario: &ScenarioConfig, cfg: &TrainConfig) -> Result<(N, TrainingLog)> {
    cfg.validate()?;
    let topology = build_topology(scenario)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut target = net.clone();
    let mut adam = Adam::new(net.num_params());
    let mut replay = ReplayBuffer::new(cfg.replay_capacity)?;
    let mut log = TrainingLog::default();
    let mut env_steps = 0usize;
    let fixed = generate_tasks(scenario, scenario.rng_seed)?;
    let mut best: Option<(usize, f64, Vec<f64>)> = None;

    for ep in 0..cfg.episodes {
        let workload = if cfg.resample_workload {
            generate_tasks(scenario, cfg.seed.wrapping_mul(1_000_003).wrapping_add(ep as u64))?
        } else {
            fixed.clone()
        };
        let mut sim = Simulator::new(scenario, topology.clone(), workload)?;
        let (eps, lr) = (cfg.epsilon(ep), cfg.learning_rate(ep));
        let mut state = Some(sim.observe()?);
        while let Some(s) = state.take() {
            let q = net.q_values(&s)?;
            let actions = select_actions(&q, eps, &mut rng);
            let out = sim.step(&actions)?;
            let next = if sim.is_done() { None } else { Some(sim.observe()?) };
            replay.push(Transition {
                state: s,
                actions: out.applied,
                reward: out.reward,
                next_state: next.clone(),
            });
            state = next;
            env_steps += 1;
            if replay.len() >= cfg.batch_size && env_steps % cfg.train_every == 0 {
                let batch = replay.sample(cfg.batch_size, &mut rng)?;
                train_step(&mut net, &target, &batch, cfg.gamma, &mut adam, lr)?;
                log.gradient_steps += 1;
                if log.gradient_steps % cfg.target_sync_every == 0 {
                    target.set_params(&net.params())?;
                    log.target_syncs += 1;
                }
            }
        }
        let m = sim.metrics();
        log.episodes.push(EpisodeLog {
            episode: ep,
            total_reward: m.total_reward,
            violations: m.violations,
            min_remaining_energy: m.min_remaining_energy,
            epsilon: eps,
            lr,
        });
        if cfg.select_every > 0 && (ep + 1) % cfg.select_every == 0 {
            let mut sim = Simulator::new(scenario, topology.clone(), fixed.clone())?;
            let score = run_episode(&mut sim, &mut Greedy::new(net.clone(), "probe"))?.total_reward;
            if best.as_ref().is_none_or(|(_, s, _)| score > *s) {
                best = Some((ep, score, net.params()));
            }
        }
    }
    if let Some((ep, score, params)) = best {
        net.set_params(&params)?;
        log.selected = Some((ep, score));
    }
    Ok((net, log))
}

/// Acts greedily with respect to a value network.
#[derive(Debug, Clone)]
pub struct Greedy<N> {
    pub net: N,
    pub label: String,
}

impl<N: QNetwork> Greedy<N> {
    pub fn new(net: N, label: impl Into<String>) -> Self {
        Self { net, label: label.into() }
    }
}

impl<N: QNetwork> Policy for Greedy<N> {
    fn name(&self) -> String {
        self.label.clone()
    }

    fn act(&mut self, sim: &Simulator) -> Result<Vec<bool>> {
        let q = self.net.q_values(&sim.observe()?)?;
        Ok((0..q.rows).map(|j| q.get(j, 1) > q.get(j, 0)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gnn::{ChainConfig, ChainParams, EdgeSet, GraphFeatures, FEATURE_WIDTH};

    fn state_placeholder(applied: &[bool]) -> GraphFeatures {
        GraphFeatures {
            iot: Matrix::zeros(0, FEATURE_WIDTH),
            uav: Matrix::zeros(applied.len(), FEATURE_WIDTH),
            mec: Matrix::zeros(1, FEATURE_WIDTH),
            iot_uav: EdgeSet::empty(FEATURE_WIDTH),
            uav_uav: EdgeSet::empty(FEATURE_WIDTH),
            uav_mec: EdgeSet::empty(FEATURE_WIDTH),
            mec_uav: EdgeSet::empty(FEATURE_WIDTH),
        }
    }

    #[test]
    fn schedules() {
        let c = TrainConfig { episodes: 100, ..TrainConfig::default() };
        assert_eq!(c.epsilon(0), 1.0);
        assert!((c.epsilon(10) - 0.999f64.powi(10)).abs() < 1e-15);
        assert_eq!(TrainConfig { epsilon_decay: 0.5, ..c.clone() }.epsilon(50), 0.05);
        assert_eq!(c.learning_rate(0), 1e-3);
        assert_eq!(c.learning_rate(24), 1e-3);
        assert_eq!(c.learning_rate(25), 5e-4);
        assert_eq!(c.learning_rate(99), 1.25e-4);
    }

    #[test]
    fn greedy_ties_go_off() {
        let q = Matrix::from_vec(3, 2, vec![1.0, 1.0, 0.0, 2.0, 3.0, -1.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(select_actions(&q, 0.0, &mut rng), vec![false, true, false]);
    }

    #[test]
    fn adam_first_step_moves_by_lr() {
        let mut a = Adam::new(2);
        let mut p = vec![1.0, -1.0];
        a.step(&mut p, &[0.3, -2.0], 0.1);
        assert!((p[0] - 0.9).abs() < 1e-6 && (p[1] + 0.9).abs() < 1e-6);
    }

    #[test]
    fn terminal_targets_are_the_reward() {
        let net = ChainParams::new(ChainConfig::small(), 0).unwrap();
        let t = Transition {
            state: state_placeholder(&[true, false]),
            actions: vec![true, false],
            reward: -0.25,
            next_state: None,
        };
        assert_eq!(td_targets(&net, &t, 0.9).unwrap(), vec![-0.25, -0.25]);
    }

    #[test]
    fn non_finite_loss_is_reported() {
        let mut net = ChainParams::new(ChainConfig::small(), 0).unwrap();
        let target = net.clone();
        let sim = Simulator::from_config(&ScenarioConfig::tiny(), 0).unwrap();
        let t = Transition {
            state: sim.observe().unwrap(),
            actions: vec![true, true],
            reward: f64::NAN,
            next_state: None,
        };
        let mut adam = Adam::new(net.num_params());
        let err = train_step(&mut net, &target, &[&t], 0.9, &mut adam, 1e-3).unwrap_err();
        assert!(matches!(err, Error::NonFiniteLoss { .. }));
    }

    #[test]
    fn zero_episodes_returns_initial_parameters() {
        let net = ChainParams::new(ChainConfig::small(), 1).unwrap();
        let cfg = TrainConfig { episodes: 0, ..TrainConfig::default() };
        let (out, log) = train(net.clone(), &ScenarioConfig::tiny(), &cfg).unwrap();
        assert_eq!(out, net);
        assert!(log.episodes.is_empty());
    }

    #[test]
    fn training_is_deterministic() {
        let cfg = TrainConfig { episodes: 4, batch_size: 4, replay_capacity: 32, select_every: 2, ..TrainConfig::default() };
        let run = || train(ChainParams::new(ChainConfig::small(), 5).unwrap(), &ScenarioConfig::tiny(), &cfg).unwrap();
        let (a, la) = run();
        let (b, lb) = run();
        assert_eq!(la, lb);
        assert_eq!(a.params(), b.params());
    }

    #[test]
    fn short_run_syncs_target_and_logs() {
        let cfg = TrainConfig {
            episodes: 6,
            batch_size: 4,
            replay_capacity: 64,
            target_sync_every: 3,
            ..TrainConfig::default()
        };
        let net = ChainParams::new(ChainConfig::small(), 1).unwrap();
        let (_, log) = train(net, &ScenarioConfig::tiny(), &cfg).unwrap();
        assert_eq!(log.episodes.len(), 6);
        // 24 environment steps, training from step 4 on.
        assert_eq!(log.gradient_steps, 21);
        assert_eq!(log.target_syncs, 7);
    }
}
