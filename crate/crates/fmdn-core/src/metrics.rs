//! End-to-end stream metrics: normalized throughput and mean delay, built on
//! the converged steady state.
//!
//! Delay follows the per-hop sojourn decomposition: residual of the service
//! in progress, foreign WFQ cycles until the tagged class is drawn, queueing
//! amplification via Little's law, then the tagged packet's own service. Two
//! discrete-time details matter for agreement with the slot simulator: a
//! foreign class only costs a full service when its queue actually has a
//! head-of-line packet (beacon filler otherwise), and the tagged packet's
//! first attempt coincides with the cycle draw, so its own service adds
//! (L - 1)/p + 1 slots rather than L/p.

use crate::config::FleetConfig;
use crate::error::{Error, Result};
use crate::link::LinkModel;
use crate::steady_state::SteadyState;
use serde::{Deserialize, Serialize};

/// Per-stream end-to-end metrics. Delays are in slots; saturated routes
/// report infinity (kept JSON-safe by the `inf_as_string` representation).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StreamMetrics {
    /// Uplink normalized throughput per source UAV (gateway entry unused).
    pub theta_up: Vec<f64>,
    /// Downlink per-device normalized throughput per destination UAV.
    pub theta_down: Vec<f64>,
    /// Mean uplink end-to-end delay per source, slots.
    #[serde(with = "inf_as_string")]
    pub delay_up: Vec<f64>,
    /// Mean downlink end-to-end delay per destination, slots.
    #[serde(with = "inf_as_string")]
    pub delay_down: Vec<f64>,
    /// Mean residual service on the air channel per UAV, slots.
    pub residual_air: Vec<f64>,
    /// Mean residual service on the ground channel per UAV, slots.
    pub residual_ground: Vec<f64>,
}

/// JSON has no infinity literal; saturated delays round-trip as the string
/// `"inf"` instead of silently degrading to null.
mod inf_as_string {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    #[derive(serde::Serialize, Deserialize)]
    #[serde(untagged)]
    enum Cell {
        Number(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(values: &[f64], ser: S) -> Result<S::Ok, S::Error> {
        let cells: Vec<Cell> = values
            .iter()
            .map(|&v| {
                if v.is_finite() {
                    Cell::Number(v)
                } else {
                    Cell::Text("inf".into())
                }
            })
            .collect();
        serde::Serialize::serialize(&cells, ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Vec<f64>, D::Error> {
        let cells: Vec<Cell> = Deserialize::deserialize(de)?;
        cells
            .into_iter()
            .map(|c| match c {
                Cell::Number(v) => Ok(v),
                Cell::Text(s) if s == "inf" => Ok(f64::INFINITY),
                Cell::Text(s) if s == "-inf" => Ok(f64::NEG_INFINITY),
                Cell::Text(s) => Err(D::Error::custom(format!("bad delay cell `{s}`"))),
            })
            .collect()
    }
}

/// Uplink end-to-end throughput of the stream sourced at UAV `s`: the rate
/// delivered to the cloud, i.e. the gateway arrival times the backhaul
/// success.
pub fn e2e_throughput_up(
    s: usize,
    state: &SteadyState,
    lm: &LinkModel,
    fleet: &FleetConfig,
) -> f64 {
    if s >= lm.gw {
        return 0.0;
    }
    state.pi_uplink[lm.gw][s] * fleet.channel.gw_success
}

/// Downlink end-to-end throughput toward one device served by UAV `d`:
/// the arrival rate at the serving UAV, shared over its cell, times the
/// terminal ground-hop survival.
pub fn e2e_throughput_down(
    d: usize,
    state: &SteadyState,
    lm: &LinkModel,
    _fleet: &FleetConfig,
) -> f64 {
    if d >= lm.gw {
        return 0.0;
    }
    state.arrival_down[d][d] / (lm.n_devices[d] + 1.0) * lm.survival_ground[d]
}

/// Class-weighted mean residual service on the air channel of UAV `i`.
pub fn residual_time_air(
    i: usize,
    state: &SteadyState,
    lm: &LinkModel,
    fleet: &FleetConfig,
) -> f64 {
    let t = &fleet.traffic;
    let up_w = if i == lm.gw {
        0.0
    } else {
        state.pi_uplink[i].iter().take(i + 1).sum::<f64>() * t.f_uplink_air
    };
    let air_dest = if i == lm.gw { lm.gw } else { i };
    let dn_w = state.pi_downlink[i].iter().take(air_dest).sum::<f64>() * t.f_downlink_air;
    let beacon_w = (1.0 - up_w - dn_w).max(0.0);
    up_w * lm.link_up[i].residual()
        + dn_w * lm.link_down[i].residual()
        + beacon_w * lm.beacon_air[i].residual()
}

/// Class-weighted mean residual service on the ground channel of UAV `i`.
pub fn residual_time_ground(
    i: usize,
    state: &SteadyState,
    lm: &LinkModel,
    fleet: &FleetConfig,
) -> f64 {
    if i == lm.gw {
        return 0.0;
    }
    let w = state.pi_downlink[i][i] * fleet.traffic.f_downlink_ground;
    w * lm.link_ground[i].residual() + (1.0 - w).max(0.0) * lm.beacon_ground[i].residual()
}

/// Expected service of a foreign WFQ cycle on the air channel seen by an
/// uplink packet: the downlink class costs a full service only when its
/// head of line is occupied, otherwise the cycle degenerates to a beacon.
fn foreign_service_for_uplink(
    i: usize,
    state: &SteadyState,
    lm: &LinkModel,
    fleet: &FleetConfig,
) -> f64 {
    let t = &fleet.traffic;
    let f_b = 1.0 - t.f_uplink_air - t.f_downlink_air;
    let foreign = t.f_downlink_air + f_b;
    if foreign <= 0.0 {
        return 0.0;
    }
    let occupied = state.pi_downlink[i].iter().take(i).sum::<f64>().min(1.0);
    let w_data = t.f_downlink_air * occupied;
    let w_beacon = f_b + t.f_downlink_air * (1.0 - occupied);
    (lm.link_down[i].service * w_data + lm.beacon_air[i].service * w_beacon) / foreign
}

/// Mirror image for a downlink packet waiting out uplink and beacon cycles.
fn foreign_service_for_downlink(
    i: usize,
    state: &SteadyState,
    lm: &LinkModel,
    fleet: &FleetConfig,
) -> f64 {
    let t = &fleet.traffic;
    let f_b = 1.0 - t.f_uplink_air - t.f_downlink_air;
    let foreign = t.f_uplink_air + f_b;
    if foreign <= 0.0 {
        return 0.0;
    }
    let occupied = if i == lm.gw {
        0.0
    } else {
        state.pi_uplink[i].iter().take(i + 1).sum::<f64>().min(1.0)
    };
    let w_data = t.f_uplink_air * occupied;
    let w_beacon = f_b + t.f_uplink_air * (1.0 - occupied);
    (lm.link_up[i].service * w_data + lm.beacon_air[i].service * w_beacon) / foreign
}

/// Sojourn at one air hop: waiting time per the renewal/Little decomposition
/// plus the tagged packet's own service from the draw slot onward.
fn air_hop_sojourn(
    residual: f64,
    n_foreign: f64,
    foreign_service: f64,
    own: &crate::mac::LinkStats,
    arrival_rate: f64,
    uav_id: u32,
    context: &str,
) -> Result<f64> {
    let per_packet = own.service + n_foreign * foreign_service;
    let denom = 1.0 - arrival_rate * per_packet;
    if denom <= 0.0 {
        return Err(Error::Unstable {
            uav: uav_id,
            context: context.to_string(),
        });
    }
    let wait = (residual + n_foreign * foreign_service) / denom;
    let own_service = (own.attempts - 1.0) / own.p_attempt + 1.0;
    Ok(wait + own_service)
}

/// End-to-end uplink delay in slots for the stream sourced at UAV `s`.
pub fn e2e_delay_up(
    s: usize,
    state: &SteadyState,
    lm: &LinkModel,
    fleet: &FleetConfig,
) -> Result<f64> {
    if s >= lm.gw {
        return Err(Error::Usage(format!(
            "uav {} is not an uplink source",
            s + 1
        )));
    }
    let t = &fleet.traffic;
    if t.f_uplink_air <= 0.0 {
        return Err(Error::Unstable {
            uav: s as u32 + 1,
            context: "uplink queue".into(),
        });
    }
    let n_foreign = (1.0 - t.f_uplink_air) / t.f_uplink_air;
    let mut total = 0.0;
    for i in s..lm.m {
        if i == lm.gw {
            // Dedicated backhaul: deterministic one-slot service.
            let a: f64 = state.arrival_up[lm.gw].iter().sum();
            let denom = 1.0 - a;
            if denom <= 0.0 {
                return Err(Error::Unstable {
                    uav: i as u32 + 1,
                    context: "uplink queue".into(),
                });
            }
            total += 1.0 / denom + 1.0;
            continue;
        }
        let a: f64 = state.arrival_up[i].iter().take(i + 1).sum();
        if !state.stable_up[i] {
            return Err(Error::Unstable {
                uav: i as u32 + 1,
                context: "uplink queue".into(),
            });
        }
        total += air_hop_sojourn(
            residual_time_air(i, state, lm, fleet),
            n_foreign,
            foreign_service_for_uplink(i, state, lm, fleet),
            &lm.link_up[i],
            a,
            i as u32 + 1,
            "uplink queue",
        )?;
    }
    Ok(total)
}

/// End-to-end downlink delay in slots for the stream terminating at UAV `d`.
pub fn e2e_delay_down(
    d: usize,
    state: &SteadyState,
    lm: &LinkModel,
    fleet: &FleetConfig,
) -> Result<f64> {
    if d >= lm.gw {
        return Err(Error::Usage(format!(
            "uav {} is not a downlink destination",
            d + 1
        )));
    }
    let t = &fleet.traffic;
    if t.f_downlink_air <= 0.0 || t.f_downlink_ground <= 0.0 {
        return Err(Error::Unstable {
            uav: d as u32 + 1,
            context: "downlink queue".into(),
        });
    }
    let n_foreign_air = (1.0 - t.f_downlink_air) / t.f_downlink_air;
    let mut total = 0.0;
    // Air relays from the gateway down to d+1.
    for i in (d + 1..lm.m).rev() {
        if !state.stable_down_air[i] {
            return Err(Error::Unstable {
                uav: i as u32 + 1,
                context: "downlink air queue".into(),
            });
        }
        let air_dest = if i == lm.gw { lm.gw } else { i };
        let a: f64 = state.arrival_down[i].iter().take(air_dest).sum();
        total += air_hop_sojourn(
            residual_time_air(i, state, lm, fleet),
            n_foreign_air,
            foreign_service_for_downlink(i, state, lm, fleet),
            &lm.link_down[i],
            a,
            i as u32 + 1,
            "downlink air queue",
        )?;
    }
    // Terminal ground hop at d.
    if !state.stable_down_ground[d] {
        return Err(Error::Unstable {
            uav: d as u32 + 1,
            context: "downlink ground queue".into(),
        });
    }
    let n_gb = (1.0 - t.f_downlink_ground) / t.f_downlink_ground;
    let a_g = state.arrival_down[d][d];
    total += air_hop_sojourn(
        residual_time_ground(d, state, lm, fleet),
        n_gb,
        lm.beacon_ground[d].service,
        &lm.link_ground[d],
        a_g,
        d as u32 + 1,
        "downlink ground queue",
    )?;
    Ok(total)
}

/// Evaluate every stream metric for a solved fleet.
pub fn compute_metrics(state: &SteadyState, lm: &LinkModel, fleet: &FleetConfig) -> StreamMetrics {
    let m = lm.m;
    let mut theta_up = vec![0.0; m];
    let mut theta_down = vec![0.0; m];
    let mut delay_up = vec![f64::INFINITY; m];
    let mut delay_down = vec![f64::INFINITY; m];
    let mut residual_air = vec![0.0; m];
    let mut residual_ground = vec![0.0; m];
    for i in 0..m {
        residual_air[i] = residual_time_air(i, state, lm, fleet);
        residual_ground[i] = residual_time_ground(i, state, lm, fleet);
    }
    for s in 0..lm.gw {
        theta_up[s] = e2e_throughput_up(s, state, lm, fleet);
        theta_down[s] = e2e_throughput_down(s, state, lm, fleet);
        if let Ok(v) = e2e_delay_up(s, state, lm, fleet) {
            delay_up[s] = v;
        }
        if let Ok(v) = e2e_delay_down(s, state, lm, fleet) {
            delay_down[s] = v;
        }
    }
    StreamMetrics {
        theta_up,
        theta_down,
        delay_up,
        delay_down,
        residual_air,
        residual_ground,
    }
}
