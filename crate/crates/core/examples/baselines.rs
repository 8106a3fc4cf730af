//! Compare the heuristic baselines on the default scenario.
//!
//! ```text
//! cargo run --example baselines -- [seed]
//! ```

use uav_offload::scenario::ScenarioConfig;
use uav_offload::sim::{evaluate, HFc, HRr, Policy, RandomPolicy};

fn main() -> uav_offload::Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let config = ScenarioConfig::default();
    let mut policies: Vec<Box<dyn Policy>> =
        vec![Box::new(HFc), Box::new(HRr), Box::new(RandomPolicy::new(seed))];
    println!("{:<8} {:>6} {:>10} {:>8} {:>10}", "policy", "tasks", "violations", "min R", "objective");
    for p in &mut policies {
        let m = evaluate(&config, seed, p.as_mut())?;
        println!(
            "{:<8} {:>6} {:>10} {:>8.1} {:>10.4}",
            p.name(),
            m.tasks,
            m.violations,
            m.min_remaining_energy,
            m.objective
        );
    }
    Ok(())
}
