//! Air-to-ground and air-to-air link physics.
//!
//! The LoS probability follows the sigmoid elevation model, path loss is free
//! space plus a LoS/NLoS-weighted excess term, and the achievable rate is the
//! Shannon capacity of an FDMA sub-channel. Path loss is a dB quantity and is
//! converted to a linear gain `10^(-L/10)` before entering the SNR.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Propagation and radio constants shared by every link in a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelParams {
    /// Environment constant `a` of the LoS sigmoid.
    pub a: f64,
    /// Environment constant `b` of the LoS sigmoid.
    pub b: f64,
    /// Carrier frequency in Hz.
    pub carrier_hz: f64,
    /// Speed of light in m/s.
    pub light_speed: f64,
    /// Excess loss on LoS links, dB.
    pub eta_los_db: f64,
    /// Excess loss on NLoS links, dB.
    pub eta_nlos_db: f64,
    /// Gaussian noise power, W.
    pub noise_power_w: f64,
    /// Bandwidth available to one transmitting node, Hz. A node with several
    /// concurrent outgoing links splits it equally (FDMA).
    pub bandwidth_hz: f64,
    /// IoT transmit power, W.
    pub tx_power_iot_w: f64,
    /// UAV-C transmit power, W.
    pub tx_power_uav_w: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            a: 4.88,
            b: 0.43,
            carrier_hz: 2.0e9,
            light_speed: 3.0e8,
            eta_los_db: 0.1,
            eta_nlos_db: 21.0,
            noise_power_w: 1.0e-13,
            bandwidth_hz: 1.0e6,
            tx_power_iot_w: 0.1,
            tx_power_uav_w: 0.5,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("a", self.a),
            ("b", self.b),
            ("carrier_hz", self.carrier_hz),
            ("light_speed", self.light_speed),
            ("noise_power_w", self.noise_power_w),
            ("bandwidth_hz", self.bandwidth_hz),
            ("tx_power_iot_w", self.tx_power_iot_w),
            ("tx_power_uav_w", self.tx_power_uav_w),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("channel.{name} must be positive, got {v}")));
            }
        }
        if !(self.eta_los_db >= 0.0 && self.eta_nlos_db >= self.eta_los_db) {
            return Err(Error::Config(format!(
                "channel excess losses must satisfy eta_nlos >= eta_los >= 0, got {} / {}",
                self.eta_nlos_db, self.eta_los_db
            )));
        }
        Ok(())
    }
}

/// A point in the field, meters. `z` is altitude above ground.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn distance(&self, other: &Position) -> f64 {
        let (dx, dy, dz) = (self.x - other.x, self.y - other.y, self.z - other.z);
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    pub fn horizontal_distance(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Kind of a directed radio link; decides transmit power and LoS handling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkKind {
    /// IoT device to UAV-C, IoT transmit power, elevation-dependent LoS.
    IotToUav,
    /// UAV-C relay, UAV transmit power, always LoS.
    UavToUav,
    /// UAV-C to the terrestrial MEC, UAV transmit power, elevation-dependent LoS.
    UavToMec,
}

/// Elevation angle in degrees between the ground plane and the line joining
/// the two endpoints, in `[0, 90]`.
pub fn elevation_angle(src: &Position, dst: &Position) -> Result<f64> {
    let horizontal = src.horizontal_distance(dst);
    let vertical = (dst.z - src.z).abs();
    if horizontal == 0.0 && vertical == 0.0 {
        return Err(Error::DegenerateGeometry(format!(
            "coincident endpoints at ({}, {}, {})",
            src.x, src.y, src.z
        )));
    }
    Ok(vertical.atan2(horizontal).to_degrees())
}

/// `1 / (1 + a·exp(-b·(θ - a)))`.
pub fn los_probability(theta_deg: f64, params: &ChannelParams) -> f64 {
    1.0 / (1.0 + params.a * (-params.b * (theta_deg - params.a)).exp())
}

/// Free-space loss plus the LoS-weighted excess loss, dB.
pub fn path_loss_db(distance: f64, p_los: f64, params: &ChannelParams) -> Result<f64> {
    if !(distance > 0.0) {
        return Err(Error::Domain(format!("path loss needs distance > 0, got {distance}")));
    }
    let free_space = 20.0
        * (4.0 * std::f64::consts::PI * params.carrier_hz * distance / params.light_speed).log10();
    Ok(free_space + p_los * params.eta_los_db + (1.0 - p_los) * params.eta_nlos_db)
}

/// Shannon rate over the full per-node bandwidth, bits/s.
pub fn data_rate(loss_db: f64, tx_power_w: f64, params: &ChannelParams) -> f64 {
    data_rate_with_bandwidth(loss_db, tx_power_w, params.bandwidth_hz, params)
}

/// Shannon rate over an explicit bandwidth allocation, bits/s.
pub fn data_rate_with_bandwidth(
    loss_db: f64,
    tx_power_w: f64,
    bandwidth_hz: f64,
    params: &ChannelParams,
) -> f64 {
    let gain = 10f64.powf(-loss_db / 10.0);
    bandwidth_hz * (1.0 + tx_power_w * gain / params.noise_power_w).log2()
}

/// Time to push `packet_bits` through a link of the given rate.
pub fn link_delay(packet_bits: f64, rate: f64) -> Result<f64> {
    if !(rate > 0.0) {
        return Err(Error::UnreachableLink {
            from: "?".into(),
            to: "?".into(),
            rate,
        });
    }
    Ok(packet_bits / rate)
}

/// Rate of a directed link whose source shares its bandwidth among `share`
/// concurrent outgoing links.
pub fn link_rate(
    src: &Position,
    dst: &Position,
    kind: LinkKind,
    share: usize,
    params: &ChannelParams,
) -> Result<f64> {
    let share = share.max(1) as f64;
    let (p_los, tx_power) = match kind {
        LinkKind::UavToUav => (1.0, params.tx_power_uav_w),
        LinkKind::IotToUav => (
            los_probability(elevation_angle(src, dst)?, params),
            params.tx_power_iot_w,
        ),
        LinkKind::UavToMec => (
            los_probability(elevation_angle(src, dst)?, params),
            params.tx_power_uav_w,
        ),
    };
    let loss = path_loss_db(src.distance(dst), p_los, params)?;
    Ok(data_rate_with_bandwidth(
        loss,
        tx_power,
        params.bandwidth_hz / share,
        params,
    ))
}
