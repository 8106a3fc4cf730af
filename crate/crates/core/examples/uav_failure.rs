//! Train a graph-network policy briefly, then run it with UAV-Cs removed.
//! The same parameters serve every fleet size.
//!
//! ```text
//! cargo run --release --example uav_failure -- [episodes]
//! ```

use uav_offload::gnn::{ChainConfig, ChainParams};
use uav_offload::rl::{train, Greedy, TrainConfig};
use uav_offload::scenario::ScenarioConfig;
use uav_offload::sweep::{run_cell, Experiment};

fn main() -> uav_offload::Result<()> {
    let episodes: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100);
    let config = ScenarioConfig::default();
    let (net, _) = train(ChainParams::new(ChainConfig::small(), 0)?, &config, &TrainConfig::quick(episodes, 0))?;
    let mut policy = Greedy::new(net, "gnn");
    for removed in 0..=3 {
        let m = run_cell(&config, Experiment::UavFailure, removed as f64, 1000, &mut policy)?;
        println!(
            "{} UAV-Cs: {} violations, min R {:.0}, objective {:.4}",
            config.num_uav - removed,
            m.violations,
            m.min_remaining_energy,
            m.objective
        );
    }
    Ok(())
}
