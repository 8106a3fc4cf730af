//! Air-to-ground link budget as a UAV-C moves away from a ground device.
//!
//! ```text
//! cargo run --example channel
//! ```

use uav_offload::channel::{elevation_angle, link_rate, los_probability, path_loss_db, ChannelParams, LinkKind, Position};

fn main() -> uav_offload::Result<()> {
    let params = ChannelParams::default();
    let ground = Position::new(0.0, 0.0, 0.0);
    println!("{:>8} {:>9} {:>7} {:>9} {:>12}", "dist m", "elev deg", "P(LoS)", "loss dB", "rate Mbit/s");
    for d in [10.0, 25.0, 50.0, 100.0, 200.0, 400.0] {
        let uav = Position::new(d, 0.0, 5.0);
        let theta = elevation_angle(&ground, &uav)?;
        let p = los_probability(theta, &params);
        let loss = path_loss_db(ground.distance(&uav), p, &params)?;
        let rate = link_rate(&ground, &uav, LinkKind::IotToUav, 1, &params)?;
        println!("{d:>8.0} {theta:>9.2} {p:>7.3} {loss:>9.2} {:>12.3}", rate / 1e6);
    }

    // A source with several outgoing links splits its bandwidth.
    let a = Position::new(0.0, 0.0, 5.0);
    let b = Position::new(100.0, 0.0, 5.0);
    for share in 1..=4 {
        let rate = link_rate(&a, &b, LinkKind::UavToUav, share, &params)?;
        println!("relay link shared {share} ways: {:.3} Mbit/s", rate / 1e6);
    }
    Ok(())
}
