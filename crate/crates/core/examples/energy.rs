//! Battery accounting of one UAV-C under a duty cycle, checked against the
//! closed form, plus the severity term for a small fleet.
//!
//! ```text
//! cargo run --example energy
//! ```

use uav_offload::energy::{closed_form_remaining, severity, weakest_uav, SeverityMode};
use uav_offload::scenario::ScenarioConfig;

fn main() -> uav_offload::Result<()> {
    let config = ScenarioConfig::default();
    let initial = config.initial_energy();
    let duty: Vec<bool> = (0..config.num_intervals).map(|t| t % 3 != 2).collect();
    let mut state = initial;
    for (t, &on) in duty.iter().enumerate() {
        state = state.step(on)?;
        println!("t={t:>2} {} remaining {:>5.1} Wh", if on { "on " } else { "off" }, state.remaining);
    }
    println!("closed form gives {:.1} Wh", closed_form_remaining(&initial, &duty));

    let mut fleet = vec![initial; 3];
    fleet[1].remaining = 40.0;
    fleet[2].remaining = 70.0;
    println!("weakest UAV-C: {:?}", weakest_uav(&fleet));
    for active in [[true, false, true], [true, true, true]] {
        let s = severity(&fleet, &active, SeverityMode::Penalty)?;
        println!("severity with {active:?}: {s:.1}");
    }
    Ok(())
}
