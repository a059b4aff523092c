//! Probabilistic air-ground channel shared by the user-to-UAV uplink and the
//! UAV-to-node downlink.
//!
//! A link is line-of-sight with an elevation-angle-dependent probability;
//! non-line-of-sight propagation is attenuated by a fixed factor. The latency
//! engines need per-hop transmission times as deterministic functions of
//! horizontal distance, so the LoS/NLoS mixture is collapsed before the rate
//! computation, by default in the power domain (mixture-weighted received
//! power into one Shannon rate), optionally in the rate domain (mixture of
//! per-state Shannon rates). The switch exists so the gap between the two
//! conventions can be measured instead of argued about.

use serde::{Deserialize, Serialize};

/// How the LoS/NLoS mixture is collapsed into one transmission rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AveragingMode {
    /// Average received power across the two states, then one Shannon rate.
    PowerAverage,
    /// Shannon rate per state, averaged with the LoS probability.
    RateAverage,
}

/// One directional air-ground link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Transmit power, watts.
    pub tx_power: f64,
    /// Path-loss exponent (>= 1).
    pub alpha: f64,
    /// Linear NLoS attenuation ratio in (0, 1].
    pub eta: f64,
    /// Environment constant scaling the elevation-angle sigmoid.
    pub env_b: f64,
    /// Environment constant offsetting the elevation-angle sigmoid.
    pub env_c: f64,
    pub averaging: AveragingMode,
}

/// Geometry of a ground endpoint relative to the UAV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkGeometry {
    /// Horizontal ground distance to the UAV's ground projection, meters.
    pub horizontal_distance: f64,
    /// UAV altitude, meters (> 0).
    pub altitude: f64,
}

impl LinkGeometry {
    pub fn new(horizontal_distance: f64, altitude: f64) -> Self {
        Self {
            horizontal_distance,
            altitude,
        }
    }

    /// Elevation angle seen from the ground endpoint, degrees. Defined as 90°
    /// at zero horizontal distance (arctan limit).
    pub fn elevation_deg(&self) -> f64 {
        if self.horizontal_distance == 0.0 {
            90.0
        } else {
            (self.altitude / self.horizontal_distance).atan().to_degrees()
        }
    }

    /// Squared slant range r² + h².
    pub fn slant_range_sq(&self) -> f64 {
        self.horizontal_distance * self.horizontal_distance + self.altitude * self.altitude
    }
}

/// Probability of line-of-sight connectivity:
/// 1 / (1 + C·exp(−B·(θ − C))) with θ the elevation angle in degrees.
pub fn los_probability(geom: &LinkGeometry, env_b: f64, env_c: f64) -> f64 {
    let theta = geom.elevation_deg();
    1.0 / (1.0 + env_c * (-env_b * (theta - env_c)).exp())
}

/// Received power averaged over the LoS/NLoS states:
/// [P_LoS + η·(1 − P_LoS)] · P_tx · (r² + h²)^(−α/2), watts.
pub fn expected_received_power(params: &ChannelParams, geom: &LinkGeometry) -> f64 {
    let p_los = los_probability(geom, params.env_b, params.env_c);
    let mixture = p_los + params.eta * (1.0 - p_los);
    mixture * bare_path_power(params, geom)
}

/// Received power before NLoS weighting: P_tx · (r² + h²)^(−α/2).
fn bare_path_power(params: &ChannelParams, geom: &LinkGeometry) -> f64 {
    params.tx_power * geom.slant_range_sq().powf(-params.alpha / 2.0)
}

/// Achievable rate in bit/s under the configured averaging mode.
pub fn transmission_rate(
    params: &ChannelParams,
    geom: &LinkGeometry,
    bandwidth: f64,
    noise: f64,
) -> f64 {
    match params.averaging {
        AveragingMode::PowerAverage => {
            let snr = expected_received_power(params, geom) / noise;
            bandwidth * (1.0 + snr).log2()
        }
        AveragingMode::RateAverage => {
            let p_los = los_probability(geom, params.env_b, params.env_c);
            let bare = bare_path_power(params, geom);
            let rate_los = bandwidth * (1.0 + bare / noise).log2();
            let rate_nlos = bandwidth * (1.0 + params.eta * bare / noise).log2();
            p_los * rate_los + (1.0 - p_los) * rate_nlos
        }
    }
}

/// One-hop transmission latency in seconds: data_size / rate.
///
/// Zero data transmits instantly; a rate that underflows to zero reports
/// infinite latency rather than an error so a comm-dead link flows through
/// the probability pipeline as "never served".
pub fn transmission_latency(
    data_size: f64,
    params: &ChannelParams,
    geom: &LinkGeometry,
    bandwidth: f64,
    noise: f64,
) -> f64 {
    if data_size == 0.0 {
        return 0.0;
    }
    let rate = transmission_rate(params, geom, bandwidth, noise);
    if rate <= 0.0 || !rate.is_finite() {
        return f64::INFINITY;
    }
    data_size / rate
}
