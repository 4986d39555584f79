//! Derived per-fleet link model: everything the steady-state solver, the
//! metric formulas and the simulator consume, computed once from a
//! [`FleetConfig`].

use crate::channel::{coverage_probability, ClampCounter};
use crate::config::FleetConfig;
use crate::error::Result;
use crate::mac::{
    air_success, collision_fixed_point, ground_success, saturation_throughput, LinkStats,
};
use crate::topology::{contact_probability, covered_count};

/// One-tier neighborhood of UAV `i` in a chain of `m`.
pub fn neighbors(i: usize, m: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(2);
    if i > 0 {
        out.push(i - 1);
    }
    if i + 1 < m {
        out.push(i + 1);
    }
    out
}

/// Fleet-wide derived constants. Indices are 0-based along the chain; the
/// gateway is index `gw = m - 1`.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct LinkModel {
    pub m: usize,
    pub gw: usize,
    /// Expected covered devices per stop, per UAV (0 at the gateway).
    pub n_devices: Vec<f64>,
    /// Coverage probability per UAV (0 at the gateway).
    pub p_cov: Vec<f64>,
    /// Contact probability toward the upper neighbor, xi_{i,i+1}.
    pub xi_up: Vec<f64>,
    /// Contact probability toward the lower neighbor, xi_{i,i-1}.
    pub xi_down: Vec<f64>,
    /// Air-channel attempt probability per UAV.
    pub p_air: Vec<f64>,
    /// Ground-channel attempt probability per UAV (0 at the gateway).
    pub p_ground: Vec<f64>,
    /// Per-cell saturation throughput, packets per slot.
    pub sat_throughput: Vec<f64>,
    /// Per-slot success of the link i -> i+1 (includes the attempt factor).
    pub slot_success_up: Vec<f64>,
    /// Per-slot success of the link i -> i-1.
    pub slot_success_down: Vec<f64>,
    /// Per-slot success of a tagged ground transmission at UAV i.
    pub slot_success_ground: Vec<f64>,
    /// Attempt/service moments of the uplink air hop i -> i+1.
    pub link_up: Vec<LinkStats>,
    /// Attempt/service moments of the downlink air hop i -> i-1.
    pub link_down: Vec<LinkStats>,
    /// Attempt/service moments of the terminal ground hop at UAV i.
    pub link_ground: Vec<LinkStats>,
    /// Single-attempt beacon moments on the air channel.
    pub beacon_air: Vec<LinkStats>,
    /// Single-attempt beacon moments on the ground channel.
    pub beacon_ground: Vec<LinkStats>,
    /// Probability a packet survives the retry budget on hop i -> i+1.
    pub survival_up: Vec<f64>,
    /// Same for hop i -> i-1.
    pub survival_down: Vec<f64>,
    /// Same for the terminal ground hop.
    pub survival_ground: Vec<f64>,
    /// Uplink injection rate per slot at UAV i: n S P_cov / (n + 1).
    pub injection_rate: Vec<f64>,
    /// Count of clamped LoS / coverage evaluations during derivation.
    pub clamp_events: (u64, u64, u64),
}

impl LinkModel {
    pub fn derive(fleet: &FleetConfig) -> Result<Self> {
        fleet.validate()?;
        let m = fleet.len();
        let gw = fleet.gateway_index();
        let mac = &fleet.mac;
        let clamps = ClampCounter::default();

        let mut n_devices = vec![0.0; m];
        let mut p_cov = vec![0.0; m];
        for i in 0..m {
            let u = &fleet.uavs[i];
            n_devices[i] = covered_count(u, fleet.device_density);
            if !u.is_gateway {
                p_cov[i] = coverage_probability(
                    u.altitude_m,
                    u.aperture_rad,
                    fleet.device_density,
                    &fleet.channel,
                    &clamps,
                )?;
            }
        }

        let xi =
            |i: usize, j: usize| contact_probability(&fleet.uavs[i], &fleet.uavs[j], fleet.d_tx_m);
        let mut xi_up = vec![0.0; m];
        let mut xi_down = vec![0.0; m];
        for i in 0..m {
            if i + 1 < m {
                xi_up[i] = xi(i, i + 1);
            }
            if i > 0 {
                xi_down[i] = xi(i, i - 1);
            }
        }

        // One collision fixed point per (UAV, channel).
        let mut p_air = vec![0.0; m];
        let mut p_ground = vec![0.0; m];
        let mut sat = vec![0.0; m];
        for i in 0..m {
            p_air[i] = collision_fixed_point(neighbors(i, m).len() as u32 + 1, mac)?;
            if i != gw {
                let contenders = n_devices[i].ceil() as u32 + 1;
                p_ground[i] = collision_fixed_point(contenders, mac)?;
                sat[i] = saturation_throughput(n_devices[i], mac, p_cov[i], p_ground[i])?;
            }
        }

        // Per-slot link successes per the interference product, then the
        // per-attempt conditionals q = P / p feeding the retry moments.
        let slot_air = |tx: usize, rx: usize| -> f64 {
            let terms: Vec<(f64, f64)> = neighbors(rx, m)
                .into_iter()
                .filter(|&k| k != tx)
                .map(|k| (p_air[k], xi(k, rx)))
                .collect();
            air_success(p_air[tx], xi(tx, rx), p_air[rx], &terms)
        };
        let mut slot_success_up = vec![0.0; m];
        let mut slot_success_down = vec![0.0; m];
        let mut slot_success_ground = vec![0.0; m];
        let mut link_up = Vec::with_capacity(m);
        let mut link_down = Vec::with_capacity(m);
        let mut link_ground = Vec::with_capacity(m);
        let mut beacon_air = Vec::with_capacity(m);
        let mut beacon_ground = Vec::with_capacity(m);
        for i in 0..m {
            slot_success_up[i] = if i + 1 < m { slot_air(i, i + 1) } else { 0.0 };
            slot_success_down[i] = if i > 0 { slot_air(i, i - 1) } else { 0.0 };
            slot_success_ground[i] = if i != gw {
                ground_success(n_devices[i], p_ground[i], p_cov[i])
            } else {
                0.0
            };
            let q_up = slot_success_up[i] / p_air[i];
            let q_down = slot_success_down[i] / p_air[i];
            link_up.push(LinkStats::from_success(p_air[i], q_up, mac.max_attempts)?);
            link_down.push(LinkStats::from_success(p_air[i], q_down, mac.max_attempts)?);
            beacon_air.push(LinkStats::single_attempt(p_air[i])?);
            if i != gw {
                let q_g = slot_success_ground[i] / p_ground[i];
                link_ground.push(LinkStats::from_success(p_ground[i], q_g, mac.max_attempts)?);
                beacon_ground.push(LinkStats::single_attempt(p_ground[i])?);
            } else {
                // Placeholders keep the vectors aligned; the gateway has no
                // ground channel.
                link_ground.push(LinkStats::single_attempt(1.0)?);
                beacon_ground.push(LinkStats::single_attempt(1.0)?);
            }
        }

        let k = mac.max_attempts;
        let survival_up: Vec<f64> = link_up.iter().map(|l| l.survival(k)).collect();
        let survival_down: Vec<f64> = link_down.iter().map(|l| l.survival(k)).collect();
        let survival_ground: Vec<f64> = (0..m)
            .map(|i| {
                if i == gw {
                    0.0
                } else {
                    link_ground[i].survival(k)
                }
            })
            .collect();

        let injection_rate: Vec<f64> = (0..m)
            .map(|i| {
                if i == gw {
                    0.0
                } else {
                    n_devices[i] * sat[i] * p_cov[i] / (n_devices[i] + 1.0)
                }
            })
            .collect();

        Ok(LinkModel {
            m,
            gw,
            n_devices,
            p_cov,
            xi_up,
            xi_down,
            p_air,
            p_ground,
            sat_throughput: sat,
            slot_success_up,
            slot_success_down,
            slot_success_ground,
            link_up,
            link_down,
            link_ground,
            beacon_air,
            beacon_ground,
            survival_up,
            survival_down,
            survival_ground,
            injection_rate,
            clamp_events: clamps.snapshot(),
        })
    }
}
