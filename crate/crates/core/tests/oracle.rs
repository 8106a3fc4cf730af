use uav_offload::oracle::{decode_schedule, enumerate_optimal, reference, schedule_label, SmallInstance};
use uav_offload::scenario::{build_topology, generate_tasks, RouteKind, ScenarioConfig, WeightSpec};
use uav_offload::sim::{run_episode, FixedSchedule, Simulator};

fn solve(config: &ScenarioConfig) -> uav_offload::oracle::OracleResult {
    let topology = build_topology(config).unwrap();
    let workload = generate_tasks(config, config.rng_seed).unwrap();
    enumerate_optimal(config, &topology, &workload).unwrap()
}

/// Fast UAV-Cs, a MEC too slow for any deadline, and no relaying: a task
/// meets its deadline exactly when its nearest UAV-C is on.
fn local_only(num_uav: usize, num_intervals: usize, w: f64) -> ScenarioConfig {
    ScenarioConfig {
        num_uav,
        num_intervals,
        route: RouteKind::Hover,
        uav_capacity: 100.0,
        mec_capacity: 0.01,
        max_relay_hops: 0,
        objective: WeightSpec { w, theta_h: None, theta_d: None },
        ..ScenarioConfig::tiny()
    }
}

#[test]
fn energy_only_weight_prefers_all_off() {
    let config = ScenarioConfig { objective: WeightSpec { w: 1.0, theta_h: None, theta_d: None }, ..ScenarioConfig::tiny() };
    let r = solve(&config);
    assert_eq!(r.best.schedule, "00|00|00|00");
    assert_eq!(r.best.min_remaining_energy, 92.0);
}

#[test]
fn violation_only_weight_with_local_capacity_prefers_all_on() {
    let r = solve(&local_only(2, 4, 0.0));
    assert_eq!(r.best.schedule, "11|11|11|11");
    assert_eq!(r.best.violations, 0);
    // Every other schedule leaves some task on the MEC.
    assert!(r.table.iter().filter(|s| s.schedule != r.best.schedule).all(|s| s.violations > 0));
}

#[test]
fn one_uav_one_interval_by_hand() {
    let config = local_only(1, 1, 0.5);
    let r = solve(&config);
    assert_eq!(r.table.len(), 2);
    let n = (config.num_iot * config.max_tasks_per_interval) as f64;
    // Off: battery 100 - 2, every task misses on the MEC. On: 100 - 2 - 3, none miss.
    let off = 0.5 * 98.0 / 100.0 - 0.5 * n / n;
    let on = 0.5 * 95.0 / 100.0;
    assert!((r.table[0].objective - off).abs() < 1e-12);
    assert!((r.table[1].objective - on).abs() < 1e-12);
    assert_eq!(r.best.schedule, "1");
    assert!((r.best.objective - off.max(on)).abs() < 1e-12);
}

#[test]
fn optimum_is_invariant_under_uav_relabelling() {
    let config = ScenarioConfig::tiny();
    let topology = build_topology(&config).unwrap();
    let workload = generate_tasks(&config, 0).unwrap();
    let plain = enumerate_optimal(&config, &topology, &workload).unwrap();
    let swapped = uav_offload::scenario::Topology {
        uav_routes: topology.uav_routes.iter().rev().cloned().collect(),
        ..topology.clone()
    };
    let relabelled = enumerate_optimal(&config, &swapped, &workload).unwrap();
    assert!((plain.best.objective - relabelled.best.objective).abs() < 1e-12);
}

#[test]
fn simulator_and_reference_agree_with_the_score_table() {
    let config = ScenarioConfig::tiny();
    let topology = build_topology(&config).unwrap();
    let workload = generate_tasks(&config, 0).unwrap();
    let result = enumerate_optimal(&config, &topology, &workload).unwrap();
    for (code, score) in result.table.iter().enumerate() {
        let schedule = decode_schedule(code as u64, config.num_uav, config.num_intervals);
        assert_eq!(schedule_label(&schedule), score.schedule);
        let mut sim = Simulator::new(&config, topology.clone(), workload.clone()).unwrap();
        let m = run_episode(&mut sim, &mut FixedSchedule(schedule.clone())).unwrap();
        assert_eq!(m.violations, score.violations);
        assert!((m.objective - score.objective).abs() < 1e-9);
        let (v, _, o) = reference::evaluate_schedule(&config, &topology, &workload, &schedule);
        assert_eq!(v, score.violations);
        assert!((o - score.objective).abs() < 1e-9);
    }
}

#[test]
fn small_instance_rejects_multi_task_intervals() {
    let config = ScenarioConfig { max_tasks_per_interval: 2, ..ScenarioConfig::tiny() };
    assert!(SmallInstance::new(config).is_err());
}
