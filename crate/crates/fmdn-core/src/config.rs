//! Scenario configuration: fleet geometry, channel, MAC and traffic
//! parameters, with a strict versioned TOML schema.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const SCHEMA_VERSION: u32 = 1;

/// Per-UAV geometry and kinematics. UAVs are numbered 1..=M along the chain;
/// the gateway is the last one and covers no ground devices.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UavParams {
    pub id: u32,
    /// Altitude h in meters.
    pub altitude_m: f64,
    /// Antenna aperture angle theta in radians, in (0, pi).
    pub aperture_rad: f64,
    /// Linear velocity V in m/s.
    pub velocity_mps: f64,
    /// Angular velocity omega in rad/s.
    pub angular_velocity_radps: f64,
    #[serde(default)]
    pub is_gateway: bool,
}

impl UavParams {
    /// Rotation radius r = V / omega in meters.
    pub fn rotation_radius_m(&self) -> f64 {
        self.velocity_mps / self.angular_velocity_radps
    }
}

/// Air-to-ground channel parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelParams {
    /// Environment parameter beta1 of the LoS probability.
    pub beta1: f64,
    /// Environment exponent beta2 of the LoS probability.
    pub beta2: f64,
    /// Shadowing sigma scale: sigma_los(theta) = a_los * exp(b_los * theta).
    pub a_los: f64,
    pub b_los: f64,
    /// Mean of the LoS shadow fading, dB.
    pub mu_los_db: f64,
    /// Transmit power, dBm.
    pub tx_power_dbm: f64,
    /// Noise power, dBm.
    pub noise_dbm: f64,
    /// Carrier frequency, Hz.
    pub frequency_hz: f64,
    /// SNR decoding threshold, dB.
    pub snr_threshold_db: f64,
    /// Gateway-to-cloud packet success probability over the backhaul,
    /// modeled as a configurable scalar in [0, 1].
    pub gw_success: f64,
}

/// DCF MAC parameters shared by all nodes.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MacParams {
    /// Minimum contention window W, slots.
    pub min_contention_window: u32,
    /// Maximum backoff stage b.
    pub max_backoff_stage: u32,
    /// Maximum transmission attempts per packet K (retry limit), >= 1.
    pub max_attempts: u32,
    /// Average payload length, bits.
    pub payload_bits: f64,
    /// Channel bit rate used to express the payload in channel time, bit/s.
    pub bitrate_bps: f64,
    /// Idle slot duration sigma, seconds.
    pub idle_slot_s: f64,
    /// Successful transmission duration T_s, seconds.
    pub success_time_s: f64,
    /// Collision duration T_c, seconds.
    pub collision_time_s: f64,
}

/// Weighted-fair-queuing shares and downlink traffic generators.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrafficConfig {
    /// Probability of picking the uplink queue for an air-channel cycle.
    pub f_uplink_air: f64,
    /// Probability of picking the downlink queue for an air-channel cycle.
    /// The remainder 1 - f_uplink_air - f_downlink_air goes to beacons.
    pub f_downlink_air: f64,
    /// Probability of picking the downlink queue for a ground-channel cycle;
    /// the remainder serves ground beacons.
    pub f_downlink_ground: f64,
    /// Fraction of uplink deliveries acknowledged by the cloud.
    pub ack_fraction: f64,
    /// Per-device probability per slot that the cloud emits a control packet.
    pub control_prob: f64,
}

/// Complete scenario description; single source of truth for a run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FleetConfig {
    pub schema_version: u32,
    /// Ground IoT device density, devices per square meter.
    pub device_density: f64,
    /// Air-to-air transmission range, meters.
    pub d_tx_m: f64,
    pub uavs: Vec<UavParams>,
    pub channel: ChannelParams,
    pub mac: MacParams,
    pub traffic: TrafficConfig,
}

impl FleetConfig {
    /// Number of UAVs including the gateway.
    pub fn len(&self) -> usize {
        self.uavs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.uavs.is_empty()
    }

    /// Index of the gateway UAV (validated to be the last one).
    pub fn gateway_index(&self) -> usize {
        self.uavs.len() - 1
    }

    /// Validate every invariant; returns the first violation with the
    /// offending field named.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::config(
                "schema_version",
                format!("expected {SCHEMA_VERSION}, got {}", self.schema_version),
            ));
        }
        if self.uavs.len() < 2 {
            return Err(Error::config(
                "uavs",
                "need at least one relay and a gateway",
            ));
        }
        if !(self.device_density >= 0.0) {
            return Err(Error::config("device_density", "must be >= 0"));
        }
        if !(self.d_tx_m > 0.0) {
            return Err(Error::config("d_tx_m", "must be > 0"));
        }
        let mut gateways = 0;
        for (k, u) in self.uavs.iter().enumerate() {
            let tag = format!("uavs[{k}]");
            if u.id as usize != k + 1 {
                return Err(Error::config(
                    format!("{tag}.id"),
                    format!("ids must be 1..=M in order, got {}", u.id),
                ));
            }
            if !(u.altitude_m > 0.0) {
                return Err(Error::config(format!("{tag}.altitude_m"), "must be > 0"));
            }
            if !(u.aperture_rad > 0.0 && u.aperture_rad < std::f64::consts::PI) {
                return Err(Error::config(
                    format!("{tag}.aperture_rad"),
                    "must be in (0, pi)",
                ));
            }
            if !(u.velocity_mps > 0.0) {
                return Err(Error::config(format!("{tag}.velocity_mps"), "must be > 0"));
            }
            if !(u.angular_velocity_radps > 0.0) {
                return Err(Error::config(
                    format!("{tag}.angular_velocity_radps"),
                    "must be > 0",
                ));
            }
            if u.is_gateway {
                gateways += 1;
                if k + 1 != self.uavs.len() {
                    return Err(Error::config(
                        format!("{tag}.is_gateway"),
                        "the gateway must be the last UAV in the chain",
                    ));
                }
            }
        }
        if gateways != 1 {
            return Err(Error::config(
                "uavs",
                "exactly one UAV must have is_gateway = true",
            ));
        }
        // Rotation radii non-decreasing with id: UAV 1 flies the smallest circle.
        for w in self.uavs.windows(2) {
            if w[0].rotation_radius_m() > w[1].rotation_radius_m() + 1e-12 {
                return Err(Error::config(
                    "uavs",
                    "rotation radii must be non-decreasing with id",
                ));
            }
        }
        let c = &self.channel;
        if !(c.gw_success >= 0.0 && c.gw_success <= 1.0) {
            return Err(Error::config("channel.gw_success", "must be in [0, 1]"));
        }
        if !(c.a_los > 0.0) {
            return Err(Error::config("channel.a_los", "must be > 0"));
        }
        if !(c.frequency_hz > 0.0) {
            return Err(Error::config("channel.frequency_hz", "must be > 0"));
        }
        if !(c.beta1 >= 0.0) {
            return Err(Error::config("channel.beta1", "must be >= 0"));
        }
        let m = &self.mac;
        if m.min_contention_window < 1 {
            return Err(Error::config("mac.min_contention_window", "must be >= 1"));
        }
        if m.max_attempts < 1 {
            return Err(Error::config("mac.max_attempts", "must be >= 1"));
        }
        for (name, v) in [
            ("mac.payload_bits", m.payload_bits),
            ("mac.bitrate_bps", m.bitrate_bps),
            ("mac.idle_slot_s", m.idle_slot_s),
            ("mac.success_time_s", m.success_time_s),
            ("mac.collision_time_s", m.collision_time_s),
        ] {
            if !(v > 0.0) {
                return Err(Error::config(name, "must be > 0"));
            }
        }
        let t = &self.traffic;
        for (name, v) in [
            ("traffic.f_uplink_air", t.f_uplink_air),
            ("traffic.f_downlink_air", t.f_downlink_air),
            ("traffic.f_downlink_ground", t.f_downlink_ground),
            ("traffic.ack_fraction", t.ack_fraction),
            ("traffic.control_prob", t.control_prob),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::config(name, "must be in [0, 1]"));
            }
        }
        if t.f_uplink_air + t.f_downlink_air > 1.0 + 1e-12 {
            return Err(Error::config(
                "traffic.f_uplink_air",
                "f_uplink_air + f_downlink_air must not exceed 1 (beacons get the rest)",
            ));
        }
        Ok(())
    }

    /// Parse and validate a TOML scenario. Unknown keys are rejected.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: FleetConfig =
            toml::from_str(text).map_err(|e| Error::config("<config>", e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Stable hash of the scenario, used to pair analytic and simulated
    /// artifacts produced from the same configuration.
    pub fn config_hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let mut h = Sha256::new();
        h.update(canonical.as_bytes());
        let digest = h.finalize();
        let mut out = String::with_capacity(16);
        for b in &digest[..8] {
            out.push_str(&format!("{b:02x}"));
        }
        out
    }

    /// Reference scenario: four homogeneous relays plus a gateway with the
    /// published MAC/PHY constants, moderate device density and control
    /// traffic. Every figure-style sweep starts from this file.
    pub fn reference_scenario() -> Self {
        let uav = |id: u32, gw: bool| UavParams {
            id,
            altitude_m: 20.0,
            aperture_rad: std::f64::consts::FRAC_PI_2,
            velocity_mps: 20.0,
            angular_velocity_radps: 8.0,
            is_gateway: gw,
        };
        FleetConfig {
            schema_version: SCHEMA_VERSION,
            device_density: 4.0e-4,
            d_tx_m: 15.0,
            uavs: vec![
                uav(1, false),
                uav(2, false),
                uav(3, false),
                uav(4, false),
                uav(5, true),
            ],
            channel: ChannelParams {
                beta1: 10.39,
                beta2: 0.05,
                a_los: 11.95,
                b_los: 0.136,
                mu_los_db: 1.0,
                tx_power_dbm: 20.0,
                noise_dbm: -150.0,
                frequency_hz: 2.4e9,
                snr_threshold_db: 5.0,
                gw_success: 1.0,
            },
            mac: MacParams {
                min_contention_window: 8,
                max_backoff_stage: 4,
                max_attempts: 3,
                payload_bits: 1184.0,
                bitrate_bps: 11.0e6,
                idle_slot_s: 50.0e-6,
                success_time_s: 1713.0e-6,
                collision_time_s: 1982.0e-6,
            },
            traffic: TrafficConfig {
                f_uplink_air: 0.4,
                f_downlink_air: 0.3,
                f_downlink_ground: 0.5,
                ack_fraction: 0.7,
                control_prob: 2.0e-4,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_scenario_is_valid() {
        let cfg = FleetConfig::reference_scenario();
        cfg.validate().unwrap();
        assert_eq!(cfg.gateway_index(), 4);
        assert!((cfg.uavs[0].rotation_radius_m() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn toml_round_trip_preserves_hash() {
        let cfg = FleetConfig::reference_scenario();
        let text = cfg.to_toml_string();
        let back = FleetConfig::from_toml_str(&text).unwrap();
        assert_eq!(cfg.config_hash(), back.config_hash());
    }

    #[test]
    fn wfq_shares_over_one_rejected() {
        let mut cfg = FleetConfig::reference_scenario();
        cfg.traffic.f_uplink_air = 0.8;
        cfg.traffic.f_downlink_air = 0.4;
        let err = cfg.validate().unwrap_err();
        assert!(matches!(err, Error::Config { .. }));
        assert!(err.to_string().contains("f_uplink_air"));
    }

    #[test]
    fn unknown_keys_rejected() {
        let mut text = FleetConfig::reference_scenario().to_toml_string();
        text.push_str("\nbogus_key = 1\n");
        assert!(FleetConfig::from_toml_str(&text).is_err());
    }

    #[test]
    fn gateway_must_be_last() {
        let mut cfg = FleetConfig::reference_scenario();
        cfg.uavs[4].is_gateway = false;
        cfg.uavs[0].is_gateway = true;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn radii_must_be_non_decreasing() {
        let mut cfg = FleetConfig::reference_scenario();
        cfg.uavs[0].velocity_mps = 40.0; // r = 5 m while the rest fly 2.5 m
        assert!(cfg.validate().is_err());
    }
}
