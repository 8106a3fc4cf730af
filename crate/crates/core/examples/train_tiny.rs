//! Train the graph-network policy on the two-UAV instance and compare it
//! with the exhaustive optimum.
//!
//! ```text
//! cargo run --release --example train_tiny -- [episodes] [seed]
//! ```

use uav_offload::gnn::{ChainConfig, ChainParams};
use uav_offload::oracle::{enumerate_optimal, schedule_label};
use uav_offload::rl::{train, Greedy, TrainConfig};
use uav_offload::scenario::{build_topology, generate_tasks, ScenarioConfig};
use uav_offload::sim::{run_episode, Simulator};

fn main() -> uav_offload::Result<()> {
    let mut args = std::env::args().skip(1);
    let episodes: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(800);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);

    let config = ScenarioConfig::tiny();
    let topology = build_topology(&config)?;
    let workload = generate_tasks(&config, 0)?;
    let best = enumerate_optimal(&config, &topology, &workload)?;
    println!("optimum {:.4} with {}", best.best.objective, best.best.schedule);

    let cfg = TrainConfig::tiny(episodes, seed);
    let start = std::time::Instant::now();
    let net = ChainParams::new(ChainConfig::small(), seed)?;
    let (net, log) = train(net, &config, &cfg)?;
    let mut sim = Simulator::new(&config, topology, workload)?;
    let m = run_episode(&mut sim, &mut Greedy::new(net, "gnn"))?;
    println!(
        "trained {} episodes in {:.1}s: objective {:.4} ({:.1}% of optimum) with {}",
        log.episodes.len(),
        start.elapsed().as_secs_f64(),
        m.objective,
        100.0 * m.objective / best.best.objective,
        schedule_label(&m.schedule)
    );
    Ok(())
}
