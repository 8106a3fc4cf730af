//! Score an observation with an untrained graph network, then drop UAV-Cs
//! and score again with the same parameters.
//!
//! ```text
//! cargo run --example gnn_forward
//! ```

use uav_offload::gnn::{chain_forward, ChainConfig, ChainParams};
use uav_offload::scenario::{build_topology, generate_tasks, ScenarioConfig};
use uav_offload::sim::Simulator;

fn main() -> uav_offload::Result<()> {
    let config = ScenarioConfig::default();
    let params = ChainParams::new(ChainConfig::default(), 7)?;
    println!("{} parameters", params.num_params());

    let base = build_topology(&config)?;
    let workload = generate_tasks(&config, 0)?;
    for removed in 0..3 {
        let gone: Vec<usize> = (config.num_uav - removed..config.num_uav).collect();
        let sim = Simulator::new(&config, base.without_uavs(&gone)?, workload.clone())?;
        let obs = sim.observe()?;
        let q = chain_forward(&params, &obs)?;
        let greedy: String = (0..q.rows).map(|j| if q.get(j, 1) > q.get(j, 0) { '1' } else { '0' }).collect();
        println!("{} UAV-Cs: {} IoT edges, greedy action {greedy}", q.rows, obs.iot_uav.len());
    }
    Ok(())
}
