//! Build the default topology and one workload, and dump the scenario as JSON.
//!
//! ```text
//! cargo run --example scenario -- [seed] > scenario.json
//! ```

use uav_offload::scenario::{build_topology, generate_tasks, ScenarioConfig};

fn main() -> uav_offload::Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let config = ScenarioConfig::default();
    let topology = build_topology(&config)?;
    let workload = generate_tasks(&config, seed)?;

    eprintln!("{} IoT devices, {} UAV-Cs, MEC at {:?}", topology.num_iot(), topology.num_uav(), topology.mec_position);
    for j in 0..topology.num_uav() {
        let route: Vec<String> = topology.uav_routes[j].iter().take(4).map(|p| format!("({:.0},{:.0})", p.x, p.y)).collect();
        eprintln!("uav{j}: {} ...", route.join(" "));
    }
    let load: f64 = workload.iter().map(|t| t.load).sum();
    eprintln!("{} tasks over {} intervals, total load {load:.1} s", workload.total_tasks(), config.num_intervals);
    println!("{}", config.to_json_pretty()?);
    Ok(())
}
