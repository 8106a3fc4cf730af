//! Simulator and learning library for UAV-aided IoT task offloading.
//!
//! IoT devices offload deadline-bound tasks to patrolling computing UAVs
//! (UAV-Cs), which process them, relay them to another UAV-C, or forward them
//! to a terrestrial MEC server. A controller decides every interval which
//! UAV-C processing units are switched on, trading deadline violations
//! against the battery of the most drained UAV-C.
//!
//! The crate is organised bottom-up:
//!
//! - [`channel`]: LoS probability, path loss, Shannon rate, link delay.
//! - [`scenario`]: configuration, field layout, UAV-C routes, workloads.
//! - [`routing`]: nearest-UAV routing, delay accounting, constraint checks.
//! - [`energy`]: battery stepping, severity, reward and episode objective.
//! - [`sim`]: the interval-by-interval simulator, observations, and the
//!   H-FC, H-RR and random baselines.
//! - [`gnn`]: MLPs with manual backprop and the four-block heterogeneous
//!   graph-network chain that scores each UAV-C's on/off action.
//! - [`rl`]: replay, ε-greedy, TD targets, Adam, the DQN trainer and the
//!   fully connected DQN baseline.
//! - [`oracle`]: exhaustive schedule enumeration and MILP feasibility checks.
//! - [`sweep`]: seeded experiment sweeps writing CSV.

pub mod channel;
pub mod energy;
pub mod error;
pub mod gnn;
pub mod oracle;
pub mod rl;
pub mod routing;
pub mod scenario;
pub mod sim;
pub mod sweep;

pub use error::{Error, Result};
