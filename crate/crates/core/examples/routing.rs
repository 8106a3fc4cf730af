//! Route one interval's tasks under a given activation vector and report
//! per-vertex loads, delays and constraint checks.
//!
//! ```text
//! cargo run --example routing -- 10110100
//! ```

use std::collections::BTreeMap;

use uav_offload::oracle::check_milp_feasibility;
use uav_offload::routing::{compute_delays, route_tasks, Capacities, FlowSink};
use uav_offload::scenario::{build_topology, generate_tasks, ScenarioConfig};

fn main() -> uav_offload::Result<()> {
    let config = ScenarioConfig::default();
    let pattern = std::env::args().nth(1).unwrap_or_else(|| "10101010".into());
    let active: Vec<bool> = pattern.chars().map(|c| c == '1').collect();
    let topology = build_topology(&config)?;
    let workload = generate_tasks(&config, 0)?;
    let tasks = workload.interval(0);

    let assignment = route_tasks(tasks, &topology, &active, 0, config.max_relay_hops)?;
    let caps = Capacities { uav: config.uav_capacity, mec: config.mec_capacity };
    let report = compute_delays(&assignment, tasks, &topology, &config.channel, &caps)?;

    let mut served: BTreeMap<String, usize> = BTreeMap::new();
    for r in &assignment.routes {
        if let Some(v) = r.processor() {
            *served.entry(v.to_string()).or_default() += 1;
        }
    }
    for (v, n) in &served {
        println!("{v:>6}: {n} tasks");
    }
    for (v, d) in &report.node_delays {
        println!("{v:>6}: processing delay {d:.2} s");
    }
    println!("{} of {} tasks miss their deadline", report.violation_count(), tasks.len());

    let milp = check_milp_feasibility(&assignment, tasks, config.num_iot, None, FlowSink::Processor)?;
    println!("flow and placement constraints hold: {}", milp.is_feasible());
    Ok(())
}
