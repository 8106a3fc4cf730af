//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. Tolerances are pinned below.
//!
//! ```text
//! cargo test --release --test acceptance
//! ```

mod common;

use std::process::ExitCode;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{close, random_activations, random_config};
use uav_offload::channel;
use uav_offload::energy::{closed_form_remaining, episode_objective, ObjectiveWeights, UavEnergyState};
use uav_offload::gnn::{chain_backward, chain_forward, Activation, ChainConfig, ChainParams, Matrix, Mlp};
use uav_offload::oracle::{check_milp_feasibility, enumerate_optimal, reference};
use uav_offload::rl::{train, FlatDqn, FlatDqnConfig, Greedy, TrainConfig};
use uav_offload::routing::{compute_delays, route_tasks, Capacities, FlowSink, Vertex};
use uav_offload::scenario::{build_topology, generate_tasks, ScenarioConfig};
use uav_offload::sim::{run_episode, EpisodeMetrics, HFc, HRr, Policy, RandomPolicy, Simulator};
use uav_offload::sweep::{run_cell, run_sweep, mean_violations, Experiment, Models, PolicyKind, SweepSpec};
use uav_offload::Result;

const CONFORMANCE_REL: f64 = 1e-9;
const CONFORMANCE_SAMPLES: usize = 1000;
const CONFORMANCE_BUDGET_S: f64 = 10.0;
const FD_STEP: f64 = 1e-5;
const GRADIENT_REL: f64 = 1e-4;
/// Gradients smaller than this are compared in absolute terms.
const GRADIENT_FLOOR: f64 = 1e-3;
const GRADIENT_GRAPHS: usize = 20;
const GRADIENT_BUDGET_S: f64 = 60.0;
const PERMUTATION_TOL: f64 = 1e-9;
const PERMUTATION_GRAPHS: usize = 100;
const FLOW_SCENARIOS: usize = 1000;
const BASELINE_SEEDS: std::ops::Range<u64> = 1000..1010;
const ORACLE_FRACTION: f64 = 0.95;
const ORACLE_EPISODES: usize = 800;
const ORACLE_BUDGET_S: f64 = 600.0;
const TRAIN_SEEDS: std::ops::Range<u64> = 0..5;
const TRAIN_EPISODES: usize = 300;
const EVAL_SEEDS: std::ops::Range<u64> = 1000..1005;
const MAX_INVERSIONS: usize = 1;
const ROBUST_MIN_WINS: usize = 4;
const SCALE_SLACK: f64 = 0.10;
const ENERGY_EPISODES: usize = 1000;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome { pass, detail: detail.into() })
}

/// One GNN and one flat DQN per training seed on the default scenario.
struct Trained {
    gnn: Vec<ChainParams>,
    dqn: Vec<FlatDqn>,
}

impl Trained {
    fn fit() -> Result<Self> {
        let config = ScenarioConfig::default();
        let (mut gnn, mut dqn) = (Vec::new(), Vec::new());
        for seed in TRAIN_SEEDS {
            let cfg = TrainConfig::quick(TRAIN_EPISODES, seed);
            gnn.push(train(ChainParams::new(ChainConfig::small(), seed)?, &config, &cfg)?.0);
            let flat = FlatDqnConfig { num_iot: config.num_iot, num_uav: config.num_uav, hidden: vec![64] };
            dqn.push(train(FlatDqn::new(flat, seed)?, &config, &cfg)?.0);
        }
        Ok(Self { gnn, dqn })
    }

    fn models(&self, k: usize) -> Models {
        Models { gnn: Some(self.gnn[k].clone()), dqn: Some(self.dqn[k].clone()) }
    }
}

fn main() -> ExitCode {
    let mut trained: Option<Trained> = None;
    let mut failures = 0;
    for id in 1..=10 {
        let start = Instant::now();
        let result = match id {
            1 => conformance(),
            2 => gradients(),
            3 => permutations(),
            4 => flow_validity(),
            6 => oracle_gap(),
            10 => energy_balance(),
            _ => {
                if trained.is_none() {
                    let t0 = Instant::now();
                    match Trained::fit() {
                        Ok(t) => {
                            println!("       trained {} GNN/DQN pairs in {:.1} s", TRAIN_SEEDS.count(), t0.elapsed().as_secs_f64());
                            trained = Some(t);
                        }
                        Err(e) => {
                            println!("[FAIL] AC-{id}: training failed: {e}");
                            failures += 1;
                            continue;
                        }
                    }
                }
                let t = trained.as_ref().expect("trained above");
                match id {
                    5 => baseline_bounds(t),
                    7 => capacity_trend(t),
                    8 => robustness(t),
                    _ => scalability(t),
                }
            }
        };
        let secs = start.elapsed().as_secs_f64();
        let o = result.unwrap_or_else(|e| Outcome { pass: false, detail: format!("error: {e}") });
        failures += usize::from(!o.pass);
        println!("[{}] AC-{id}: {} ({secs:.1} s)", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("{} of 10 criteria passed", 10 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

/// Library formulas against the straight-line versions in `oracle::reference`.
fn conformance() -> Result<Outcome> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let params = channel::ChannelParams::default();
    let mut bad = [0usize; 6];
    for _ in 0..CONFORMANCE_SAMPLES {
        let theta = rng.random_range(0.0..90.0);
        let p = channel::los_probability(theta, &params);
        bad[0] += usize::from(!close(p, reference::los_probability(theta, params.a, params.b), CONFORMANCE_REL, 0.0));

        let d = rng.random_range(1.0..2000.0);
        let loss = channel::path_loss_db(d, p, &params)?;
        bad[1] += usize::from(!close(loss, reference::path_loss_db(d, p, &params), CONFORMANCE_REL, 0.0));

        let tx = rng.random_range(0.01..2.0);
        let rate = channel::data_rate(loss, tx, &params);
        let want = reference::data_rate(loss, tx, params.bandwidth_hz, params.noise_power_w);
        bad[2] += usize::from(!close(rate, want, CONFORMANCE_REL, 0.0));
    }

    for _ in 0..CONFORMANCE_SAMPLES {
        let config = random_config(&mut rng);
        let topology = build_topology(&config)?;
        let workload = generate_tasks(&config, config.rng_seed)?;
        let t = rng.random_range(0..config.num_intervals);
        let tasks = workload.interval(t);
        let active = random_activations(&mut rng, config.num_uav);
        let assignment = route_tasks(tasks, &topology, &active, t, config.max_relay_hops)?;
        let caps = Capacities { uav: config.uav_capacity, mec: config.mec_capacity };
        let report = compute_delays(&assignment, tasks, &topology, &config.channel, &caps)?;

        let (ni, nj) = (config.num_iot, config.num_uav);
        let node = |v: Vertex| match v {
            Vertex::Iot(i) => i,
            Vertex::Uav(j) => ni + j,
            Vertex::Mec => ni + nj,
        };
        let paths: Vec<Vec<usize>> = assignment
            .routes
            .iter()
            .map(|r| std::iter::once(node(r.edges[0].0)).chain(r.edges.iter().map(|e| node(e.1))).collect())
            .collect();
        let mut positions = topology.iot_positions.clone();
        positions.extend((0..nj).map(|j| topology.uav_position(j, t)).collect::<Result<Vec<_>>>()?);
        positions.push(topology.mec_position);
        let want = reference::task_delays(tasks, &paths, &positions, ni, nj, &config);
        let wrong = report.task_delays.iter().zip(&want).any(|(&a, &b)| !close(a, b, CONFORMANCE_REL, 0.0));
        bad[3] += usize::from(wrong);
    }

    for _ in 0..CONFORMANCE_SAMPLES {
        let b = rng.random_range(1.0..200.0);
        let (p, c, d) = (rng.random_range(0.0..5.0), rng.random_range(0.0..2.0), rng.random_range(0.0..8.0));
        let n = rng.random_range(1..40);
        let on = random_activations(&mut rng, n);
        let mut s = UavEnergyState::full(b, p, c, d);
        for &x in &on {
            if s.depleted {
                break;
            }
            s = s.step(x)?;
        }
        let ok = match reference::remaining_energy(b, p, c, d, &on) {
            Some(r) => !s.depleted && close(s.remaining, r, CONFORMANCE_REL, b),
            None => s.depleted,
        };
        bad[4] += usize::from(!ok);

        let states: Vec<UavEnergyState> = (0..rng.random_range(1..9))
            .map(|_| UavEnergyState { remaining: rng.random_range(0.0..b), ..UavEnergyState::full(b, p, c, d) })
            .collect();
        let weights = ObjectiveWeights {
            w: rng.random_range(0.0..=1.0),
            theta_h: rng.random_range(1.0..200.0),
            theta_d: rng.random_range(1.0..5000.0),
        };
        let v = rng.random_range(0..5000);
        let got = episode_objective(&states, v, &weights);
        let min_r = states.iter().map(|s| s.remaining).fold(f64::INFINITY, f64::min);
        let want = reference::objective(weights.w, weights.theta_h, weights.theta_d, min_r, v);
        // The two terms can cancel; compare against their magnitude.
        let scale = weights.w * min_r / weights.theta_h + (1.0 - weights.w) * v as f64 / weights.theta_d;
        bad[5] += usize::from(!close(got, want, CONFORMANCE_REL, scale));
    }

    let secs = start.elapsed().as_secs_f64();
    let names = ["los", "path_loss", "rate", "delays", "energy", "objective"];
    let summary: Vec<String> = names.iter().zip(bad).map(|(n, b)| format!("{n} {b}")).collect();
    outcome(
        bad.iter().all(|&b| b == 0) && secs < CONFORMANCE_BUDGET_S,
        format!("mismatches of {CONFORMANCE_SAMPLES}: {}; {secs:.1} s of {CONFORMANCE_BUDGET_S} s", summary.join(", ")),
    )
}

/// A real observation from a random scenario after a few random intervals.
fn random_observation(rng: &mut impl Rng) -> Result<uav_offload::gnn::GraphFeatures> {
    let mut config = random_config(rng);
    config.num_intervals = rng.random_range(1..=4);
    let mut sim = Simulator::from_config(&config, config.rng_seed)?;
    let steps = rng.random_range(0..config.num_intervals);
    for _ in 0..steps {
        sim.step(&random_activations(rng, config.num_uav))?;
    }
    sim.observe()
}

fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(GRADIENT_FLOOR)
}

/// Chain and standalone MLP gradients against central differences.
fn gradients() -> Result<Outcome> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_chain: f64 = 0.0;
    let mut worst_mlp: f64 = 0.0;
    for g in 0..GRADIENT_GRAPHS {
        let obs = random_observation(&mut rng)?;
        let config = ChainConfig { hidden: vec![6], latent: 4, activation: Activation::Tanh, ..ChainConfig::default() };
        let mut params = ChainParams::new(config, g as u64)?;
        let nj = obs.num_uav();
        let w = Matrix::from_vec(nj, 2, (0..nj * 2).map(|_| rng.random_range(-1.0..1.0)).collect())?;
        let (_, cache) = params.forward_cached(&obs)?;
        let grad = chain_backward(&params, &cache, &w)?;
        let theta = params.params();
        let loss = |p: &ChainParams| -> Result<f64> {
            Ok(chain_forward(p, &obs)?.data.iter().zip(&w.data).map(|(a, b)| a * b).sum())
        };
        for k in 0..theta.len() {
            let mut t = theta.clone();
            t[k] = theta[k] + FD_STEP;
            params.set_params(&t)?;
            let up = loss(&params)?;
            t[k] = theta[k] - FD_STEP;
            params.set_params(&t)?;
            let down = loss(&params)?;
            worst_chain = worst_chain.max(relative_error(grad[k], (up - down) / (2.0 * FD_STEP)));
        }

        let widths = [3, rng.random_range(2..8), rng.random_range(2..8), 2];
        let mut mlp = Mlp::new(&widths, Activation::Tanh, &mut rng);
        let rows = rng.random_range(1..6);
        let x = Matrix::from_vec(rows, 3, (0..rows * 3).map(|_| rng.random_range(-1.0..1.0)).collect())?;
        let up_w = Matrix::from_vec(rows, 2, (0..rows * 2).map(|_| rng.random_range(-1.0..1.0)).collect())?;
        let cache = mlp.forward_batch(&x)?;
        let mut grad = vec![0.0; mlp.num_params()];
        mlp.backward_batch(&cache, &up_w, &mut grad)?;
        let mut theta = Vec::new();
        mlp.write_params(&mut theta);
        let loss = |m: &Mlp| -> Result<f64> {
            Ok(m.forward_batch(&x)?.output().data.iter().zip(&up_w.data).map(|(a, b)| a * b).sum())
        };
        for k in 0..theta.len() {
            let mut t = theta.clone();
            t[k] = theta[k] + FD_STEP;
            mlp.read_params(&t)?;
            let up = loss(&mlp)?;
            t[k] = theta[k] - FD_STEP;
            mlp.read_params(&t)?;
            let down = loss(&mlp)?;
            worst_mlp = worst_mlp.max(relative_error(grad[k], (up - down) / (2.0 * FD_STEP)));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst_chain < GRADIENT_REL && worst_mlp < GRADIENT_REL && secs < GRADIENT_BUDGET_S,
        format!(
            "worst relative error chain {worst_chain:.2e}, mlp {worst_mlp:.2e} on {GRADIENT_GRAPHS} graphs \
             (limit {GRADIENT_REL:.0e}); {secs:.1} s of {GRADIENT_BUDGET_S} s"
        ),
    )
}

/// IoT relabelling leaves Q unchanged; UAV relabelling permutes its rows.
fn permutations() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_iot: f64 = 0.0;
    let mut worst_uav: f64 = 0.0;
    for g in 0..PERMUTATION_GRAPHS {
        let obs = random_observation(&mut rng)?;
        let params = ChainParams::new(ChainConfig::default(), g as u64)?;
        let q = chain_forward(&params, &obs)?;

        let mut perm: Vec<usize> = (0..obs.num_iot()).collect();
        perm.shuffle(&mut rng);
        let q_iot = chain_forward(&params, &obs.permute_iot(&perm)?)?;
        for (a, b) in q.data.iter().zip(&q_iot.data) {
            worst_iot = worst_iot.max((a - b).abs() / a.abs().max(1.0));
        }

        let mut perm: Vec<usize> = (0..obs.num_uav()).collect();
        perm.shuffle(&mut rng);
        let q_uav = chain_forward(&params, &obs.permute_uav(&perm)?)?;
        for (j, &pj) in perm.iter().enumerate() {
            for (a, b) in q.row(j).iter().zip(q_uav.row(pj)) {
                worst_uav = worst_uav.max((a - b).abs() / a.abs().max(1.0));
            }
        }
    }
    outcome(
        worst_iot <= PERMUTATION_TOL && worst_uav <= PERMUTATION_TOL,
        format!("worst deviation IoT {worst_iot:.1e}, UAV {worst_uav:.1e} on {PERMUTATION_GRAPHS} graphs (limit {PERMUTATION_TOL:.0e})"),
    )
}

/// Every routed assignment satisfies flow conservation and the MILP constraints.
fn flow_validity() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut assignments, mut infeasible) = (0usize, 0usize);
    for _ in 0..FLOW_SCENARIOS {
        let config = random_config(&mut rng);
        let topology = build_topology(&config)?;
        let workload = generate_tasks(&config, config.rng_seed)?;
        for t in 0..config.num_intervals {
            let active = random_activations(&mut rng, config.num_uav);
            let tasks = workload.interval(t);
            let a = route_tasks(tasks, &topology, &active, t, config.max_relay_hops)?;
            let report = check_milp_feasibility(&a, tasks, config.num_iot, None, FlowSink::Processor)?;
            assignments += 1;
            infeasible += usize::from(!report.is_feasible());
        }
    }
    outcome(
        infeasible == 0,
        format!("{infeasible} infeasible of {assignments} assignments from {FLOW_SCENARIOS} scenarios"),
    )
}

fn play(config: &ScenarioConfig, seed: u64, policy: &mut dyn Policy) -> Result<EpisodeMetrics> {
    let mut sim = Simulator::from_config(config, seed)?;
    run_episode(&mut sim, policy)
}

/// H-FC bounds violations from below and H-RR bounds mission energy from
/// above, against every trained model and the other heuristics.
fn baseline_bounds(t: &Trained) -> Result<Outcome> {
    let config = ScenarioConfig::default();
    let (mut violation_exceptions, mut energy_exceptions, mut cases) = (0, 0, 0);
    for seed in BASELINE_SEEDS {
        let hfc = play(&config, seed, &mut HFc)?;
        let hrr = play(&config, seed, &mut HRr)?;
        let mut others = vec![hrr.clone(), hfc.clone(), play(&config, seed, &mut RandomPolicy::new(seed))?];
        for k in 0..t.gnn.len() {
            let models = t.models(k);
            for kind in [PolicyKind::Gnn, PolicyKind::Dqn] {
                others.push(play(&config, seed, models.policy(kind, seed)?.as_mut())?);
            }
        }
        for m in &others {
            cases += 1;
            violation_exceptions += usize::from(hfc.violations > m.violations);
            energy_exceptions += usize::from(hrr.min_remaining_energy < m.min_remaining_energy);
        }
    }
    outcome(
        violation_exceptions == 0 && energy_exceptions == 0,
        format!(
            "{} seeds x {} trained models + 3 heuristics: H-FC violation exceptions {violation_exceptions}/{cases}, \
             H-RR energy exceptions {energy_exceptions}/{cases}",
            BASELINE_SEEDS.count(),
            2 * t.gnn.len()
        ),
    )
}

/// Greedy GNN on the two-UAV instance against exhaustive enumeration.
fn oracle_gap() -> Result<Outcome> {
    let start = Instant::now();
    let config = ScenarioConfig::tiny();
    let topology = build_topology(&config)?;
    let workload = generate_tasks(&config, config.rng_seed)?;
    let optimum = enumerate_optimal(&config, &topology, &workload)?.best.objective;
    let mut objectives = Vec::new();
    for seed in TRAIN_SEEDS {
        let cfg = TrainConfig::tiny(ORACLE_EPISODES, seed);
        let (net, _) = train(ChainParams::new(ChainConfig::small(), seed)?, &config, &cfg)?;
        let mut sim = Simulator::new(&config, topology.clone(), workload.clone())?;
        objectives.push(run_episode(&mut sim, &mut Greedy::new(net, "gnn"))?.objective);
    }
    let mean = objectives.iter().sum::<f64>() / objectives.len() as f64;
    let secs = start.elapsed().as_secs_f64();
    let per_seed: Vec<String> = objectives.iter().map(|o| format!("{o:.3}")).collect();
    outcome(
        mean >= ORACLE_FRACTION * optimum && secs <= ORACLE_BUDGET_S,
        format!(
            "mean objective {mean:.4} = {:.1}% of optimum {optimum:.4} (need {:.0}%), per seed [{}], {ORACLE_EPISODES} episodes each",
            100.0 * mean / optimum,
            100.0 * ORACLE_FRACTION,
            per_seed.join(", ")
        ),
    )
}

fn inversions(series: &[(f64, f64)]) -> usize {
    series.windows(2).filter(|w| w[1].1 > w[0].1).count()
}

/// Violations fall as UAV-C capacity grows, for every policy. Learned
/// policies are averaged over all training seeds as well as workload seeds.
fn capacity_trend(t: &Trained) -> Result<Outcome> {
    let config = ScenarioConfig::default();
    let policies = [PolicyKind::Gnn, PolicyKind::Dqn, PolicyKind::Hfc, PolicyKind::Hrr, PolicyKind::Random];
    let spec = SweepSpec::new(Experiment::Capacity, EVAL_SEEDS.collect(), policies.to_vec());
    let mut rows = Vec::new();
    let mut per_model: Vec<String> = Vec::new();
    for k in 0..t.gnn.len() {
        let spec_k = if k == 0 { spec.clone() } else { SweepSpec { policies: vec![PolicyKind::Gnn, PolicyKind::Dqn], ..spec.clone() } };
        let rows_k = run_sweep(&config, &spec_k, &t.models(k))?;
        for kind in [PolicyKind::Gnn, PolicyKind::Dqn] {
            per_model.push(format!("{kind}{k} {}", inversions(&mean_violations(&rows_k, kind))));
        }
        rows.extend(rows_k);
    }
    let mut pass = true;
    let mut parts = Vec::new();
    for kind in policies {
        let series = mean_violations(&rows, kind);
        let n = inversions(&series);
        pass &= n <= MAX_INVERSIONS && series.len() == spec.values.len();
        let values: Vec<String> = series.iter().map(|(_, v)| format!("{v:.0}")).collect();
        parts.push(format!("{kind} [{}] {n} inv", values.join(" ")));
    }
    outcome(
        pass,
        format!("capacity x{:?}: {}; per-model inversions: {}", spec.values, parts.join("; "), per_model.join(", ")),
    )
}

fn mean_objective(config: &ScenarioConfig, experiment: Experiment, value: f64, policy: &mut dyn Policy) -> Result<f64> {
    let mut sum = 0.0;
    for seed in EVAL_SEEDS {
        sum += run_cell(config, experiment, value, seed, policy)?.objective;
    }
    Ok(sum / EVAL_SEEDS.count() as f64)
}

/// One UAV-C removed at inference: the GNN degrades less than the DQN.
fn robustness(t: &Trained) -> Result<Outcome> {
    let config = ScenarioConfig::default();
    let mut wins = 0;
    let mut parts = Vec::new();
    for k in 0..t.gnn.len() {
        let mut gnn = Greedy::new(t.gnn[k].clone(), "gnn");
        let mut dqn = Greedy::new(t.dqn[k].clone(), "dqn");
        let degradation = |p: &mut dyn Policy| -> Result<f64> {
            let full = mean_objective(&config, Experiment::UavFailure, 0.0, p)?;
            let failed = mean_objective(&config, Experiment::UavFailure, 1.0, p)?;
            Ok((full - failed) / full.abs())
        };
        let (g, d) = (degradation(&mut gnn)?, degradation(&mut dqn)?);
        wins += usize::from(g < d);
        parts.push(format!("{g:.2}/{d:.2}"));
    }

    // Fixed trained parameters on graphs with 4..=8 UAV-Cs.
    let mut total = true;
    let base = build_topology(&config)?;
    for removed in 0..=4 {
        let gone: Vec<usize> = (config.num_uav - removed..config.num_uav).collect();
        let topology = base.without_uavs(&gone)?;
        let sim = Simulator::new(&config, topology, generate_tasks(&config, 0)?)?;
        let q = chain_forward(&t.gnn[0], &sim.observe()?)?;
        total &= q.rows == config.num_uav - removed && q.data.iter().all(|v| v.is_finite());
    }
    outcome(
        wins >= ROBUST_MIN_WINS && total,
        format!(
            "GNN degrades less on {wins}/{} seeds (need {ROBUST_MIN_WINS}); degradation gnn/dqn per seed [{}]; \
             chain total for J=4..8: {total}",
            t.gnn.len(),
            parts.join(", ")
        ),
    )
}

/// GNN violation rate with more, lighter IoT devices.
fn scalability(t: &Trained) -> Result<Outcome> {
    let config = ScenarioConfig::default();
    let mut rates = Vec::new();
    for value in [24.0, 48.0, 96.0] {
        let (mut violations, mut tasks) = (0usize, 0usize);
        for net in &t.gnn {
            let mut policy = Greedy::new(net.clone(), "gnn");
            for seed in EVAL_SEEDS {
                let m = run_cell(&config, Experiment::Scalability, value, seed, &mut policy)?;
                violations += m.violations;
                tasks += m.tasks;
            }
        }
        rates.push(violations as f64 / tasks as f64);
    }
    let limit = rates[0] * (1.0 + SCALE_SLACK);
    outcome(
        rates[1] <= limit && rates[2] <= limit,
        format!(
            "violation rate I=24 {:.4}, I=48 {:.4}, I=96 {:.4} (limit {limit:.4})",
            rates[0], rates[1], rates[2]
        ),
    )
}

/// Iterative accounting equals the closed form exactly when every draw is
/// a whole number of Wh.
fn energy_balance() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (mut checked, mut mismatched) = (0usize, 0usize);
    for _ in 0..ENERGY_EPISODES {
        let b = rng.random_range(20..400) as f64;
        let (p, c, d) = (rng.random_range(0..5) as f64, rng.random_range(0..3) as f64, rng.random_range(1..8) as f64);
        let n = rng.random_range(1..30);
        let on = random_activations(&mut rng, n);
        let initial = UavEnergyState::full(b, p, c, d);
        let mut s = initial;
        for (k, &x) in on.iter().enumerate() {
            s = s.step(x)?;
            if s.depleted {
                mismatched += usize::from(closed_form_remaining(&initial, &on[..=k]) >= 0.0);
                break;
            }
            checked += 1;
            mismatched += usize::from(s.remaining != closed_form_remaining(&initial, &on[..=k]));
        }
    }

    // Whole simulated episodes on the default scenario.
    let config = ScenarioConfig::default();
    for seed in BASELINE_SEEDS {
        let policies: [Box<dyn Policy>; 3] = [Box::new(HFc), Box::new(HRr), Box::new(RandomPolicy::new(seed))];
        for mut policy in policies {
            let mut sim = Simulator::from_config(&config, seed)?;
            let m = run_episode(&mut sim, policy.as_mut())?;
            for (j, state) in sim.energy().iter().enumerate() {
                let column: Vec<bool> = m.schedule.iter().map(|row| row[j]).collect();
                checked += 1;
                mismatched += usize::from(state.remaining != closed_form_remaining(&config.initial_energy(), &column));
            }
        }
    }
    outcome(mismatched == 0, format!("{mismatched} mismatches in {checked} bit-exact comparisons"))
}
