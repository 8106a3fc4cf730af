//! Save a network to disk, load it back and confirm identical Q-values.
//!
//! ```text
//! cargo run --example checkpoint -- [path]
//! ```

use uav_offload::gnn::{chain_forward, ChainConfig, ChainParams};
use uav_offload::scenario::ScenarioConfig;
use uav_offload::sim::Simulator;

fn main() -> uav_offload::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "gnn.ckpt".into());
    let params = ChainParams::new(ChainConfig::default(), 42)?;
    params.save(&path)?;
    let loaded = ChainParams::load(&path)?;

    let obs = Simulator::from_config(&ScenarioConfig::default(), 0)?.observe()?;
    let (a, b) = (chain_forward(&params, &obs)?, chain_forward(&loaded, &obs)?);
    let size = std::fs::metadata(&path)?.len();
    println!("{path}: {size} bytes, fingerprint {:016x}", loaded.fingerprint());
    println!("Q-values identical after reload: {}", a == b);
    Ok(())
}
