//! Train the graph-network and fully connected policies on the default
//! scenario and compare them with the heuristics on held-out workloads.
//!
//! ```text
//! cargo run --release --example train_default -- [episodes] [seed]
//! ```

use std::time::Instant;

use uav_offload::gnn::{ChainConfig, ChainParams};
use uav_offload::rl::{train, FlatDqn, FlatDqnConfig, Greedy, TrainConfig};
use uav_offload::scenario::ScenarioConfig;
use uav_offload::sim::{evaluate, HFc, HRr, Policy};

fn main() -> uav_offload::Result<()> {
    let mut args = std::env::args().skip(1);
    let episodes: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(300);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);
    let config = ScenarioConfig::default();
    let tc = TrainConfig::quick(episodes, seed);

    let t0 = Instant::now();
    let (gnn, _) = train(ChainParams::new(ChainConfig::small(), seed)?, &config, &tc)?;
    println!("gnn trained in {:.1}s", t0.elapsed().as_secs_f64());
    let t0 = Instant::now();
    let flat = FlatDqnConfig { num_iot: config.num_iot, num_uav: config.num_uav, hidden: vec![64] };
    let (dqn, _) = train(FlatDqn::new(flat, seed)?, &config, &tc)?;
    println!("dqn trained in {:.1}s", t0.elapsed().as_secs_f64());

    let mut policies: Vec<Box<dyn Policy>> = vec![
        Box::new(HFc),
        Box::new(HRr),
        Box::new(Greedy::new(gnn, "gnn")),
        Box::new(Greedy::new(dqn, "dqn")),
    ];
    let seeds = 1000..1005u64;
    let n = seeds.clone().count() as f64;
    println!("{:<6} {:>10} {:>8} {:>10}", "policy", "violations", "min R", "objective");
    for p in &mut policies {
        let (mut v, mut r, mut o) = (0.0, 0.0, 0.0);
        for s in seeds.clone() {
            let m = evaluate(&config, s, p.as_mut())?;
            v += m.violations as f64 / n;
            r += m.min_remaining_energy / n;
            o += m.objective / n;
        }
        println!("{:<6} {:>10.1} {:>8.1} {:>10.4}", p.name(), v, r, o);
    }
    Ok(())
}
