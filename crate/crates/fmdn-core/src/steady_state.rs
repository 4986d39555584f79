//! Steady-state traffic intensities: per-stream rate balance on the uplink
//! and downlink chains, coupled to the WFQ cycle lengths through a damped
//! outer fixed point.
//!
//! Given frozen cycle lengths the balance equations are explicit in chain
//! order (the uplink system is unit-lower-triangular, the downlink one
//! diagonal), so each inner pass is a single waterfall sweep. Queues whose
//! head-of-line probability mass would exceed 1 are scaled onto the boundary
//! and marked unstable instead of erroring; saturated regimes are legitimate
//! operating points.

use crate::config::FleetConfig;
use crate::error::{Error, Result};
use crate::link::LinkModel;
use serde::{Deserialize, Serialize};

const DAMPING: f64 = 0.5;
const TOLERANCE: f64 = 1e-9;
const MAX_ITERATIONS: u32 = 10_000;

/// Converged traffic intensities and rates. All matrices are `m x m` with
/// zero in structurally absent entries; `[i][s]` is queue `i`, stream `s`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SteadyState {
    /// P[uplink queue i non-empty with a stream-s packet at head of line].
    pub pi_uplink: Vec<Vec<f64>>,
    /// Same for the downlink queue and destination d.
    pub pi_downlink: Vec<Vec<f64>>,
    /// Per-UAV uplink load: sum of pi_uplink rows.
    pub queue_load_up: Vec<f64>,
    /// Per-UAV downlink load: sum over both downlink service classes.
    pub queue_load_down: Vec<f64>,
    /// Head-of-line mass of relayed (air) downlink classes.
    pub load_down_air: Vec<f64>,
    /// Head-of-line mass of the terminal (ground) downlink class.
    pub load_down_ground: Vec<f64>,
    /// Mean air-channel cycle length per UAV, attempt slots.
    pub cycle_air: Vec<f64>,
    /// Mean ground-channel cycle length per UAV, attempt slots.
    pub cycle_ground: Vec<f64>,
    pub arrival_up: Vec<Vec<f64>>,
    pub departure_up: Vec<Vec<f64>>,
    pub arrival_down: Vec<Vec<f64>>,
    pub departure_down: Vec<Vec<f64>>,
    pub stable_up: Vec<bool>,
    pub stable_down_air: Vec<bool>,
    pub stable_down_ground: Vec<bool>,
    pub iterations: u32,
    /// Largest |arrival - departure| over stable (queue, stream) pairs.
    pub max_balance_residual: f64,
}

impl SteadyState {
    /// True when every queue (uplink, downlink air and ground classes) is
    /// stable.
    pub fn all_stable(&self) -> bool {
        self.stable_up.iter().all(|&b| b)
            && self.stable_down_air.iter().all(|&b| b)
            && self.stable_down_ground.iter().all(|&b| b)
    }
}

/// Mean air-channel cycle length at UAV `i` (Eq.-12 structure): data classes
/// weighted by head-of-line probability and WFQ share, beacons filling the
/// remainder with unit cycles. The gateway's uplink leaves on the backhaul,
/// so only downlink classes occupy its air cycles.
pub fn cycle_length_air(
    i: usize,
    pi_uplink: &[Vec<f64>],
    pi_downlink: &[Vec<f64>],
    lm: &LinkModel,
    fleet: &FleetConfig,
) -> Result<f64> {
    let t = &fleet.traffic;
    let up_w = if i == lm.gw {
        0.0
    } else {
        pi_uplink[i].iter().take(i + 1).sum::<f64>() * t.f_uplink_air
    };
    let dn_w = pi_downlink[i].iter().take(i).sum::<f64>() * t.f_downlink_air;
    let beacon_w = 1.0 - up_w - dn_w;
    if beacon_w < -1e-9 {
        return Err(Error::config(
            "traffic",
            format!(
                "WFQ weights inconsistent with loads at uav {} (beacon share {beacon_w})",
                i + 1
            ),
        ));
    }
    Ok(up_w * lm.link_up[i].attempts + dn_w * lm.link_down[i].attempts + beacon_w.max(0.0))
}

/// Mean ground-channel cycle length at UAV `i` (Eq.-19 structure with the
/// single aggregated ground-destination class).
pub fn cycle_length_ground(
    i: usize,
    pi_downlink: &[Vec<f64>],
    lm: &LinkModel,
    fleet: &FleetConfig,
) -> Result<f64> {
    if i == lm.gw {
        return Ok(1.0);
    }
    let w = pi_downlink[i][i] * fleet.traffic.f_downlink_ground;
    let beacon_w = 1.0 - w;
    if beacon_w < -1e-9 {
        return Err(Error::config(
            "traffic",
            format!("ground WFQ weight inconsistent with load at uav {}", i + 1),
        ));
    }
    Ok(w * lm.link_ground[i].attempts + beacon_w.max(0.0))
}

/// Departure rate of stream `s` from uplink queue `i`, packets per slot:
/// pi f p xi / Lbar for relays, pi for the gateway's backhaul.
pub fn uplink_departure(
    i: usize,
    s: usize,
    state: &SteadyState,
    lm: &LinkModel,
    fleet: &FleetConfig,
) -> f64 {
    let pi = state.pi_uplink[i][s];
    if i == lm.gw {
        return pi;
    }
    pi * fleet.traffic.f_uplink_air * lm.p_air[i] * lm.xi_up[i] / state.cycle_air[i]
}

/// Arrival rate of stream `s` into uplink queue `i`: the local injection for
/// i = s, otherwise the upstream departures that survived the retry budget.
pub fn uplink_arrival(
    i: usize,
    s: usize,
    state: &SteadyState,
    lm: &LinkModel,
    fleet: &FleetConfig,
) -> f64 {
    if i == s {
        return lm.injection_rate[i];
    }
    if s > i {
        return 0.0;
    }
    uplink_departure(i - 1, s, state, lm, fleet) * lm.survival_up[i - 1]
}

/// Departure rate of destination-`d` packets from downlink queue `i`: air
/// branch for relayed destinations, ground branch for the terminal class.
pub fn downlink_departure(
    i: usize,
    d: usize,
    state: &SteadyState,
    lm: &LinkModel,
    fleet: &FleetConfig,
) -> f64 {
    let t = &fleet.traffic;
    let pi = state.pi_downlink[i][d];
    if d < i {
        pi * t.f_downlink_air * lm.p_air[i] * lm.xi_down[i] / state.cycle_air[i]
    } else if d == i && i != lm.gw {
        pi * t.f_downlink_ground * lm.p_ground[i] * lm.p_cov[i] / state.cycle_ground[i]
    } else {
        0.0
    }
}

/// Cloud-side entry rate of the destination-`d` downlink stream at the
/// gateway: acks for a fraction of that stream's uplink deliveries plus the
/// control traffic of the destination cell, thinned by the backhaul.
pub fn downlink_entry_rate(
    d: usize,
    state: &SteadyState,
    lm: &LinkModel,
    fleet: &FleetConfig,
) -> f64 {
    let t = &fleet.traffic;
    let acks = t.ack_fraction * state.pi_uplink[lm.gw][d];
    (acks + lm.n_devices[d] * t.control_prob) * fleet.channel.gw_success
}

/// Total downlink arrival rate at UAV `i`: every stream whose route passes
/// through `i`, surviving the air hops from the gateway. At the gateway this
/// also counts the control packets addressed to the gateway itself, which
/// are consumed on arrival.
pub fn downlink_arrival(i: usize, state: &SteadyState, lm: &LinkModel, fleet: &FleetConfig) -> f64 {
    if i == lm.gw {
        let streams: f64 = (0..lm.gw)
            .map(|d| downlink_entry_rate(d, state, lm, fleet))
            .sum();
        return streams + fleet.traffic.control_prob * fleet.channel.gw_success;
    }
    (0..=i).map(|d| state.arrival_down[i][d]).sum()
}

struct Sweep {
    pi_up: Vec<Vec<f64>>,
    pi_dn: Vec<Vec<f64>>,
    arr_up: Vec<Vec<f64>>,
    arr_dn: Vec<Vec<f64>>,
    stable_up: Vec<bool>,
    stable_dn_air: Vec<bool>,
    stable_dn_gnd: Vec<bool>,
}

/// One waterfall pass with frozen cycle lengths.
fn balance_sweep(
    lm: &LinkModel,
    fleet: &FleetConfig,
    cycle_air: &[f64],
    cycle_ground: &[f64],
) -> Sweep {
    let m = lm.m;
    let gw = lm.gw;
    let t = &fleet.traffic;
    let zeta = fleet.channel.gw_success;
    let mut pi_up = vec![vec![0.0; m]; m];
    let mut pi_dn = vec![vec![0.0; m]; m];
    let mut arr_up = vec![vec![0.0; m]; m];
    let mut arr_dn = vec![vec![0.0; m]; m];
    let mut stable_up = vec![true; m];
    let mut stable_dn_air = vec![true; m];
    let mut stable_dn_gnd = vec![true; m];

    // Uplink waterfall, source to gateway.
    for i in 0..gw {
        let coef = t.f_uplink_air * lm.p_air[i] * lm.xi_up[i] / cycle_air[i];
        let mut demand = 0.0;
        for s in 0..=i {
            let a = if s == i {
                lm.injection_rate[i]
            } else {
                // Survived departures of the upstream queue.
                pi_up[i - 1][s]
                    * (t.f_uplink_air * lm.p_air[i - 1] * lm.xi_up[i - 1] / cycle_air[i - 1])
                    * lm.survival_up[i - 1]
            };
            arr_up[i][s] = a;
            pi_up[i][s] = if a <= 0.0 {
                0.0
            } else if coef > 0.0 {
                a / coef
            } else {
                f64::INFINITY
            };
            demand += pi_up[i][s];
        }
        if demand > 1.0 + 1e-12 {
            stable_up[i] = false;
            if demand.is_finite() {
                for s in 0..=i {
                    pi_up[i][s] /= demand;
                }
            } else {
                for s in 0..=i {
                    pi_up[i][s] = if pi_up[i][s].is_finite() { 0.0 } else { 1.0 };
                }
                let fin: f64 = pi_up[i].iter().sum();
                if fin > 1.0 {
                    for s in 0..=i {
                        pi_up[i][s] /= fin;
                    }
                }
            }
        }
    }
    // Gateway uplink: departs every slot it is non-empty.
    {
        let mut demand = 0.0;
        for s in 0..gw {
            let a = pi_up[gw - 1][s]
                * (t.f_uplink_air * lm.p_air[gw - 1] * lm.xi_up[gw - 1] / cycle_air[gw - 1])
                * lm.survival_up[gw - 1];
            arr_up[gw][s] = a;
            pi_up[gw][s] = a;
            demand += a;
        }
        if demand > 1.0 + 1e-12 {
            stable_up[gw] = false;
            for s in 0..gw {
                pi_up[gw][s] /= demand;
            }
        }
    }

    // Downlink waterfall, gateway to UAV 1.
    let mut inflow = vec![vec![0.0; m]; m]; // inflow[i][d]
    for d in 0..gw {
        inflow[gw][d] = (t.ack_fraction * pi_up[gw][d] + lm.n_devices[d] * t.control_prob) * zeta;
    }
    for i in (0..m).rev() {
        let coef_air = if i > 0 {
            t.f_downlink_air * lm.p_air[i] * lm.xi_down[i] / cycle_air[i]
        } else {
            0.0
        };
        let coef_gnd = if i != gw {
            t.f_downlink_ground * lm.p_ground[i] * lm.p_cov[i] / cycle_ground[i]
        } else {
            0.0
        };
        let top = if i == gw { gw } else { i + 1 };
        let mut air_demand = 0.0;
        for d in 0..top.min(m) {
            let a = inflow[i][d];
            arr_dn[i][d] = a;
            let coef = if d == i { coef_gnd } else { coef_air };
            pi_dn[i][d] = if a <= 0.0 {
                0.0
            } else if coef > 0.0 {
                a / coef
            } else {
                f64::INFINITY
            };
            if d < i || i == gw {
                air_demand += pi_dn[i][d];
            }
        }
        // Per-server clamping: the air relays and the terminal ground class
        // drain through independent servers.
        if air_demand > 1.0 + 1e-12 {
            stable_dn_air[i] = false;
            if air_demand.is_finite() {
                for d in 0..top.min(m) {
                    if d < i || i == gw {
                        pi_dn[i][d] /= air_demand;
                    }
                }
            } else {
                for d in 0..top.min(m) {
                    if (d < i || i == gw) && !pi_dn[i][d].is_finite() {
                        pi_dn[i][d] = 1.0;
                    } else if d < i || i == gw {
                        pi_dn[i][d] = 0.0;
                    }
                }
            }
        }
        if i != gw {
            if pi_dn[i][i] > 1.0 + 1e-12 {
                stable_dn_gnd[i] = false;
                pi_dn[i][i] = 1.0;
            }
            if !pi_dn[i][i].is_finite() {
                stable_dn_gnd[i] = false;
                pi_dn[i][i] = 1.0;
            }
        }
        // Push the relayed flows one hop down.
        if i > 0 {
            for d in 0..i {
                inflow[i - 1][d] = pi_dn[i][d] * coef_air * lm.survival_down[i];
            }
        }
    }

    Sweep {
        pi_up,
        pi_dn,
        arr_up,
        arr_dn,
        stable_up,
        stable_dn_air,
        stable_dn_gnd,
    }
}

/// Solve the coupled rate-balance / cycle-length system for a fleet.
pub fn solve_steady_state(fleet: &FleetConfig, lm: &LinkModel) -> Result<SteadyState> {
    let m = lm.m;
    let mut pi_up = vec![vec![0.0; m]; m];
    let mut pi_dn = vec![vec![0.0; m]; m];
    let mut iterations = 0;
    let mut converged = false;
    let mut last_delta = f64::INFINITY;
    let mut sweep = None;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut cycle_air = vec![1.0; m];
        let mut cycle_ground = vec![1.0; m];
        for i in 0..m {
            cycle_air[i] = cycle_length_air(i, &pi_up, &pi_dn, lm, fleet)?;
            cycle_ground[i] = cycle_length_ground(i, &pi_dn, lm, fleet)?;
        }
        let s = balance_sweep(lm, fleet, &cycle_air, &cycle_ground);
        let mut delta: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                let nu = pi_up[i][j] + DAMPING * (s.pi_up[i][j] - pi_up[i][j]);
                let nd = pi_dn[i][j] + DAMPING * (s.pi_dn[i][j] - pi_dn[i][j]);
                delta = delta
                    .max((nu - pi_up[i][j]).abs())
                    .max((nd - pi_dn[i][j]).abs());
                pi_up[i][j] = nu;
                pi_dn[i][j] = nd;
            }
        }
        if !delta.is_finite() {
            return Err(Error::numerical("solve_steady_state", "non-finite iterate"));
        }
        last_delta = delta;
        sweep = Some(s);
        if delta < TOLERANCE {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::numerical(
            "solve_steady_state",
            format!(
                "no convergence after {MAX_ITERATIONS} iterations (last delta {last_delta:.3e})"
            ),
        ));
    }
    // Final consistent pass at the converged point.
    let mut cycle_air = vec![1.0; m];
    let mut cycle_ground = vec![1.0; m];
    for i in 0..m {
        cycle_air[i] = cycle_length_air(i, &pi_up, &pi_dn, lm, fleet)?;
        cycle_ground[i] = cycle_length_ground(i, &pi_dn, lm, fleet)?;
    }
    let s = sweep.expect("at least one sweep ran");
    let pi_up = s.pi_up;
    let pi_dn = s.pi_dn;

    let t = &fleet.traffic;
    let mut dep_up = vec![vec![0.0; m]; m];
    let mut dep_dn = vec![vec![0.0; m]; m];
    for i in 0..m {
        for s_idx in 0..m {
            if pi_up[i][s_idx] > 0.0 {
                dep_up[i][s_idx] = if i == lm.gw {
                    pi_up[i][s_idx]
                } else {
                    pi_up[i][s_idx] * t.f_uplink_air * lm.p_air[i] * lm.xi_up[i] / cycle_air[i]
                };
            }
            if pi_dn[i][s_idx] > 0.0 {
                dep_dn[i][s_idx] = if s_idx < i {
                    pi_dn[i][s_idx] * t.f_downlink_air * lm.p_air[i] * lm.xi_down[i] / cycle_air[i]
                } else if s_idx == i && i != lm.gw {
                    pi_dn[i][s_idx] * t.f_downlink_ground * lm.p_ground[i] * lm.p_cov[i]
                        / cycle_ground[i]
                } else {
                    0.0
                };
            }
        }
    }

    let queue_load_up: Vec<f64> = pi_up.iter().map(|r| r.iter().sum()).collect();
    let load_down_air: Vec<f64> = (0..m)
        .map(|i| {
            let top = if i == lm.gw { lm.gw } else { i };
            pi_dn[i].iter().take(top).sum()
        })
        .collect();
    let load_down_ground: Vec<f64> = (0..m)
        .map(|i| if i == lm.gw { 0.0 } else { pi_dn[i][i] })
        .collect();
    let queue_load_down: Vec<f64> = (0..m)
        .map(|i| load_down_air[i] + load_down_ground[i])
        .collect();

    // Balance residuals over stable pairs.
    let mut max_residual: f64 = 0.0;
    for i in 0..m {
        for s_idx in 0..m {
            if s.stable_up[i] && (s.arr_up[i][s_idx] > 0.0 || dep_up[i][s_idx] > 0.0) {
                max_residual = max_residual.max((s.arr_up[i][s_idx] - dep_up[i][s_idx]).abs());
            }
            let dn_stable = if s_idx == i {
                s.stable_dn_gnd[i]
            } else {
                s.stable_dn_air[i]
            };
            if dn_stable && (s.arr_dn[i][s_idx] > 0.0 || dep_dn[i][s_idx] > 0.0) {
                max_residual = max_residual.max((s.arr_dn[i][s_idx] - dep_dn[i][s_idx]).abs());
            }
        }
    }

    Ok(SteadyState {
        pi_uplink: pi_up,
        pi_downlink: pi_dn,
        queue_load_up,
        queue_load_down,
        load_down_air,
        load_down_ground,
        cycle_air,
        cycle_ground,
        arrival_up: s.arr_up,
        departure_up: dep_up,
        arrival_down: s.arr_dn,
        departure_down: dep_dn,
        stable_up: s.stable_up,
        stable_down_air: s.stable_dn_air,
        stable_down_ground: s.stable_dn_gnd,
        iterations,
        max_balance_residual: max_residual,
    })
}
