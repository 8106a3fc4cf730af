//! UAV-C battery accounting, the QoS/mission-time objective and the
//! per-interval reward.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Battery state of one UAV-C, Wh.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UavEnergyState {
    pub battery_capacity: f64,
    pub propulsion_per_interval: f64,
    pub comm_per_interval: f64,
    pub processing_per_active_interval: f64,
    pub remaining: f64,
    pub depleted: bool,
}

impl UavEnergyState {
    /// A fully charged battery.
    pub fn full(battery: f64, propulsion: f64, comm: f64, processing: f64) -> Self {
        Self {
            battery_capacity: battery,
            propulsion_per_interval: propulsion,
            comm_per_interval: comm,
            processing_per_active_interval: processing,
            remaining: battery,
            depleted: false,
        }
    }

    /// Advance one interval. The drain is propulsion + communication, plus
    /// processing when the unit is active. A battery that would go negative
    /// is clamped at zero and marked depleted.
    pub fn step(&self, active: bool) -> Result<Self> {
        if self.depleted {
            return Err(Error::Domain("cannot step a depleted UAV-C".into()));
        }
        let mut drain = self.propulsion_per_interval + self.comm_per_interval;
        if active {
            drain += self.processing_per_active_interval;
        }
        let mut next = *self;
        if self.remaining - drain < 0.0 {
            next.remaining = 0.0;
            next.depleted = true;
        } else {
            next.remaining = self.remaining - drain;
        }
        Ok(next)
    }
}

/// Closed-form remaining energy after `activations.len()` intervals:
/// `B - (P + C)·T - Σ_t D·x_t`.
pub fn closed_form_remaining(state: &UavEnergyState, activations: &[bool]) -> f64 {
    let t = activations.len() as f64;
    let active = activations.iter().filter(|&&x| x).count() as f64;
    state.battery_capacity
        - (state.propulsion_per_interval + state.comm_per_interval) * t
        - state.processing_per_active_interval * active
}

/// Step every UAV-C once, identifying the failing UAV-C on error.
pub fn step_all(states: &[UavEnergyState], active: &[bool]) -> Result<Vec<UavEnergyState>> {
    if states.len() != active.len() {
        return Err(Error::Shape(format!(
            "{} energy states but {} activation bits",
            states.len(),
            active.len()
        )));
    }
    states
        .iter()
        .zip(active)
        .enumerate()
        .map(|(j, (s, &x))| s.step(x).map_err(|_| Error::Depleted(j)))
        .collect()
}

/// W, Θ^H and Θ^D.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveWeights {
    pub w: f64,
    pub theta_h: f64,
    pub theta_d: f64,
}

impl ObjectiveWeights {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.w) || !(self.theta_h > 0.0) || !(self.theta_d > 0.0) {
            return Err(Error::Config(format!("invalid objective weights {self:?}")));
        }
        Ok(())
    }
}

/// How the severity term treats an active lowest-battery UAV-C.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeverityMode {
    /// `-(B - R)² / B²`: the more drained the battery, the larger the penalty.
    #[default]
    Penalty,
    /// `+(R - B)² / B²`, the formula exactly as printed.
    Literal,
}

/// Index of the UAV-C with the least remaining energy; ties go to the
/// smallest index.
pub fn weakest_uav(states: &[UavEnergyState]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (j, s) in states.iter().enumerate() {
        match best {
            Some(b) if states[b].remaining <= s.remaining => {}
            _ => best = Some(j),
        }
    }
    best
}

/// Severity of the lowest-battery UAV-C given this interval's activations.
pub fn severity(states: &[UavEnergyState], active: &[bool], mode: SeverityMode) -> Result<f64> {
    if states.len() != active.len() {
        return Err(Error::Shape(format!(
            "{} energy states but {} activation bits",
            states.len(),
            active.len()
        )));
    }
    let j = weakest_uav(states).ok_or_else(|| Error::Shape("severity needs J >= 1".into()))?;
    if !active[j] {
        return Ok(1.0);
    }
    let s = &states[j];
    let drained = (s.battery_capacity - s.remaining) / s.battery_capacity;
    Ok(match mode {
        SeverityMode::Penalty => -(drained * drained),
        SeverityMode::Literal => drained * drained,
    })
}

/// `(W/Θ^H)·severity - ((1-W)/Θ^D)·violations`.
pub fn reward(severity: f64, violations: usize, weights: &ObjectiveWeights) -> f64 {
    weights.w / weights.theta_h * severity
        - (1.0 - weights.w) / weights.theta_d * violations as f64
}

/// `(W/Θ^H)·min_j R_j - ((1-W)/Θ^D)·violations`.
pub fn episode_objective(
    final_states: &[UavEnergyState],
    total_violations: usize,
    weights: &ObjectiveWeights,
) -> f64 {
    objective_from_parts(min_remaining(final_states), total_violations, weights)
}

pub fn objective_from_parts(min_remaining: f64, violations: usize, weights: &ObjectiveWeights) -> f64 {
    weights.w / weights.theta_h * min_remaining
        - (1.0 - weights.w) / weights.theta_d * violations as f64
}

pub fn min_remaining(states: &[UavEnergyState]) -> f64 {
    states
        .iter()
        .map(|s| s.remaining)
        .fold(f64::INFINITY, f64::min)
}
