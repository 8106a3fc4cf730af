//! Helpers shared by the integration test targets.
#![allow(dead_code)]

use rand::Rng;
use uav_offload::scenario::{RouteKind, ScenarioConfig};

/// A small random scenario: up to 30 IoT devices, 8 UAV-Cs and 4 intervals.
pub fn random_config(rng: &mut impl Rng) -> ScenarioConfig {
    ScenarioConfig {
        num_iot: rng.random_range(1..=30),
        num_uav: rng.random_range(1..=8),
        num_intervals: rng.random_range(1..=4),
        max_tasks_per_interval: rng.random_range(1..=4),
        uav_capacity: rng.random_range(1.0..16.0),
        route: if rng.random_bool(0.5) { RouteKind::Loop } else { RouteKind::Hover },
        max_relay_hops: rng.random_range(0..=1),
        rng_seed: rng.random(),
        ..ScenarioConfig::default()
    }
}

pub fn random_activations(rng: &mut impl Rng, n: usize) -> Vec<bool> {
    (0..n).map(|_| rng.random_bool(0.5)).collect()
}

/// `|a - b| <= tol * max(|a|, |b|, scale)`.
pub fn close(a: f64, b: f64, tol: f64, scale: f64) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(b.abs()).max(scale)
}
