//! Exhaustive search over every activation schedule of the two-UAV instance.
//!
//! ```text
//! cargo run --example oracle
//! ```

use uav_offload::oracle::SmallInstance;

fn main() -> uav_offload::Result<()> {
    let result = SmallInstance::tiny().solve()?;
    let mut table = result.table.clone();
    table.sort_by(|a, b| b.objective.total_cmp(&a.objective));
    println!("{:<12} {:>10} {:>6} {:>9}", "schedule", "violations", "min R", "objective");
    for s in table.iter().take(8) {
        println!("{:<12} {:>10} {:>6.0} {:>9.4}", s.schedule, s.violations, s.min_remaining_energy, s.objective);
    }
    println!("... {} schedules in total, best {}", table.len(), result.best.schedule);
    Ok(())
}
