//! Heuristic violations across the UAV-C capacity sweep, written as CSV.
//!
//! ```text
//! cargo run --release --example capacity_sweep -- out.csv
//! ```

use uav_offload::scenario::ScenarioConfig;
use uav_offload::sweep::{mean_violations, run_sweep, write_rows_csv, Experiment, Models, PolicyKind, SweepSpec};

fn main() -> uav_offload::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "capacity_sweep.csv".into());
    let policies = vec![PolicyKind::Hfc, PolicyKind::Hrr, PolicyKind::Random];
    let spec = SweepSpec::new(Experiment::Capacity, (0..3).collect(), policies.clone());
    let rows = run_sweep(&ScenarioConfig::default(), &spec, &Models::default())?;
    for kind in policies {
        let series: Vec<String> =
            mean_violations(&rows, kind).iter().map(|(v, n)| format!("x{v}: {n:.0}")).collect();
        println!("{kind:<7} {}", series.join("  "));
    }
    write_rows_csv(&out, &rows)?;
    println!("wrote {out}");
    Ok(())
}
