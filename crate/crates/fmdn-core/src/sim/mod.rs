//! Slotted discrete-event simulator: the independent mechanical counterpart
//! of the analytic chain. Packets move hop by hop under per-slot Bernoulli
//! attempts, WFQ class draws at cycle starts, retry budgets, and explicit
//! interference resolution; beacons fill every attempt slot that carries no
//! data packet.

pub mod rng;

use crate::config::FleetConfig;
use crate::error::{Error, Result};
use crate::link::{neighbors, LinkModel};
use crate::mac::collision_fixed_point;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rng::{stream, Purpose};
use serde::Serialize;
use std::collections::VecDeque;

/// How uplink traffic enters the relays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArrivalMode {
    /// Bernoulli injection at the cell's analytic offered rate.
    Injected,
    /// Poisson-sample the covered-device count per replication, then inject
    /// at the resampled cell rate.
    PoissonSampledCoverage,
}

/// How inter-UAV contact is realized per slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContactMode {
    /// Advance angular phases and threshold the instantaneous distance.
    Geometric,
    /// Draw an independent Bernoulli(xi) coin per pair per slot.
    BernoulliXi,
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub fleet: FleetConfig,
    pub slots: u64,
    pub warmup: u64,
    pub seed: u64,
    pub arrival_mode: ArrivalMode,
    pub contact_mode: ContactMode,
    pub replications: u32,
    /// Validation hook: when set, uplink packets enter exactly at these
    /// (slot, source) points instead of the Bernoulli injection process.
    pub scripted_injections: Option<Vec<(u64, usize)>>,
    /// Validation hook: air transmissions succeed whenever the receiver is
    /// in contact, ignoring receiver-busy and neighbor interference. Used
    /// for zero-load latency traces against the analytic formulas.
    pub ideal_air: bool,
}

impl SimConfig {
    pub fn new(fleet: FleetConfig, slots: u64, seed: u64, replications: u32) -> Self {
        SimConfig {
            fleet,
            slots,
            warmup: slots / 5,
            seed,
            arrival_mode: ArrivalMode::Injected,
            contact_mode: ContactMode::Geometric,
            replications,
            scripted_injections: None,
            ideal_air: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.fleet.validate()?;
        if self.warmup >= self.slots {
            return Err(Error::config("warmup", "must be below the slot horizon"));
        }
        if self.replications < 1 {
            return Err(Error::config("replications", "must be >= 1"));
        }
        Ok(())
    }
}

/// Exact packet accounting for one stream direction.
#[derive(Debug, Clone, Copy, Default, Serialize, serde::Deserialize, PartialEq, Eq)]
pub struct Ledger {
    pub generated: u64,
    pub delivered: u64,
    pub dropped_retry: u64,
    pub dropped_backhaul: u64,
    pub residual: u64,
}

impl Ledger {
    pub fn balanced(&self) -> bool {
        self.generated
            == self.delivered + self.dropped_retry + self.dropped_backhaul + self.residual
    }
}

/// Mean and standard error across replications.
#[derive(Debug, Clone, Copy, Default, Serialize, serde::Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub stderr: f64,
}

fn stat_over(values: &[f64]) -> Stat {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return Stat { mean, stderr: 0.0 };
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    Stat {
        mean,
        stderr: (var / n).sqrt(),
    }
}

/// Sojourn-time summary of one stream.
#[derive(Debug, Clone, Copy, Default, Serialize, serde::Deserialize)]
pub struct DelayStat {
    pub mean: f64,
    pub variance: f64,
    pub count: u64,
    /// Standard error of the mean across replications.
    pub stderr: f64,
}

/// Empirical counterparts of the analytic quantities, with exact
/// conservation ledgers.
#[derive(Debug, Clone, Serialize, serde::Deserialize)]
pub struct SimMeasurements {
    pub config_hash: String,
    pub slots: u64,
    pub warmup: u64,
    pub seed: u64,
    pub replications: u32,
    pub arrival_mode: ArrivalMode,
    pub contact_mode: ContactMode,
    /// Fraction of measured slots each uplink queue was non-empty.
    pub uplink_load: Vec<Stat>,
    /// Same for the downlink queue (air and ground classes combined).
    pub downlink_load: Vec<Stat>,
    /// Delivered uplink packets per slot, per source.
    pub theta_up: Vec<Stat>,
    /// Delivered downlink packets per slot, per destination cell.
    pub theta_down: Vec<Stat>,
    pub delay_up: Vec<DelayStat>,
    pub delay_down: Vec<DelayStat>,
    pub ledger_up: Vec<Ledger>,
    pub ledger_down: Vec<Ledger>,
    pub conservation_ok: bool,
    /// Mean uplink backlog per UAV halfway through the measured horizon.
    pub backlog_mid: Vec<f64>,
    /// Mean uplink backlog per UAV at the end of the run.
    pub backlog_end: Vec<f64>,
    /// Largest retry count ever charged to a single packet.
    pub max_attempts_seen: u32,
}

#[derive(Clone, Copy)]
struct Packet {
    stream: u8,
    born: u64,
    eligible: u64,
}

#[derive(Clone, Copy, PartialEq)]
enum AirClass {
    Uplink,
    Downlink,
}

struct RepResult {
    occ_up: Vec<f64>,
    occ_dn: Vec<f64>,
    rate_up: Vec<f64>,
    rate_dn: Vec<f64>,
    delay_up_sum: Vec<f64>,
    delay_up_sq: Vec<f64>,
    delay_up_cnt: Vec<u64>,
    delay_dn_sum: Vec<f64>,
    delay_dn_sq: Vec<f64>,
    delay_dn_cnt: Vec<u64>,
    ledger_up: Vec<Ledger>,
    ledger_dn: Vec<Ledger>,
    backlog_mid: Vec<u64>,
    backlog_end: Vec<u64>,
    max_attempts_seen: u32,
}

const QUEUE_WATERMARK: u64 = 100_000_000;

/// Run the simulator; replications execute in parallel and are combined in
/// replication order, so output is independent of scheduling.
pub fn run(cfg: &SimConfig) -> Result<SimMeasurements> {
    cfg.validate()?;
    let lm = LinkModel::derive(&cfg.fleet)?;
    let reps: Vec<Result<RepResult>> = (0..cfg.replications)
        .into_par_iter()
        .map(|rep| run_replication(cfg, &lm, rep))
        .collect();
    let mut done = Vec::with_capacity(reps.len());
    for r in reps {
        done.push(r?);
    }
    let m = lm.m;
    let collect_stat = |f: &dyn Fn(&RepResult) -> &Vec<f64>| -> Vec<Stat> {
        (0..m)
            .map(|i| stat_over(&done.iter().map(|r| f(r)[i]).collect::<Vec<_>>()))
            .collect()
    };
    let uplink_load = collect_stat(&|r| &r.occ_up);
    let downlink_load = collect_stat(&|r| &r.occ_dn);
    let theta_up = collect_stat(&|r| &r.rate_up);
    let theta_down = collect_stat(&|r| &r.rate_dn);

    let delay_stat =
        |sums: &dyn Fn(&RepResult) -> (&Vec<f64>, &Vec<f64>, &Vec<u64>)| -> Vec<DelayStat> {
            (0..m)
                .map(|i| {
                    let mut total = 0.0;
                    let mut total_sq = 0.0;
                    let mut count = 0u64;
                    let mut rep_means = Vec::new();
                    for r in &done {
                        let (s, sq, c) = sums(r);
                        total += s[i];
                        total_sq += sq[i];
                        count += c[i];
                        if c[i] > 0 {
                            rep_means.push(s[i] / c[i] as f64);
                        }
                    }
                    if count == 0 {
                        return DelayStat::default();
                    }
                    let mean = total / count as f64;
                    let variance = (total_sq / count as f64 - mean * mean).max(0.0);
                    let stderr = if rep_means.len() > 1 {
                        stat_over(&rep_means).stderr
                    } else {
                        0.0
                    };
                    DelayStat {
                        mean,
                        variance,
                        count,
                        stderr,
                    }
                })
                .collect()
        };
    let delay_up = delay_stat(&|r| (&r.delay_up_sum, &r.delay_up_sq, &r.delay_up_cnt));
    let delay_down = delay_stat(&|r| (&r.delay_dn_sum, &r.delay_dn_sq, &r.delay_dn_cnt));

    let mut ledger_up = vec![Ledger::default(); m];
    let mut ledger_down = vec![Ledger::default(); m];
    for r in &done {
        for i in 0..m {
            for (acc, one) in [
                (&mut ledger_up[i], &r.ledger_up[i]),
                (&mut ledger_down[i], &r.ledger_dn[i]),
            ] {
                acc.generated += one.generated;
                acc.delivered += one.delivered;
                acc.dropped_retry += one.dropped_retry;
                acc.dropped_backhaul += one.dropped_backhaul;
                acc.residual += one.residual;
            }
        }
    }
    let conservation_ok = done.iter().all(|r| {
        r.ledger_up.iter().all(Ledger::balanced) && r.ledger_dn.iter().all(Ledger::balanced)
    });
    let backlog_mid = (0..m)
        .map(|i| done.iter().map(|r| r.backlog_mid[i] as f64).sum::<f64>() / done.len() as f64)
        .collect();
    let backlog_end = (0..m)
        .map(|i| done.iter().map(|r| r.backlog_end[i] as f64).sum::<f64>() / done.len() as f64)
        .collect();
    Ok(SimMeasurements {
        config_hash: cfg.fleet.config_hash(),
        slots: cfg.slots,
        warmup: cfg.warmup,
        seed: cfg.seed,
        replications: cfg.replications,
        arrival_mode: cfg.arrival_mode,
        contact_mode: cfg.contact_mode,
        uplink_load,
        downlink_load,
        theta_up,
        theta_down,
        delay_up,
        delay_down,
        ledger_up,
        ledger_down,
        conservation_ok,
        backlog_mid,
        backlog_end,
        max_attempts_seen: done.iter().map(|r| r.max_attempts_seen).max().unwrap_or(0),
    })
}

/// Per-replication ground-side parameters, possibly resampled in Poisson
/// arrival mode.
struct GroundParams {
    contenders: Vec<u32>,
    p_ground: Vec<f64>,
    injection: Vec<f64>,
    control_rate: Vec<f64>,
}

fn ground_params(cfg: &SimConfig, lm: &LinkModel, rep: u32) -> Result<GroundParams> {
    let fleet = &cfg.fleet;
    let m = lm.m;
    let mut contenders = vec![0u32; m];
    let mut p_ground = lm.p_ground.clone();
    let mut injection = lm.injection_rate.clone();
    let mut control_rate = vec![0.0; m];
    for i in 0..m {
        if i == lm.gw {
            continue;
        }
        let n_eff = match cfg.arrival_mode {
            ArrivalMode::Injected => lm.n_devices[i],
            ArrivalMode::PoissonSampledCoverage => {
                let mut r = stream(cfg.seed, rep, i, Purpose::CellSample);
                if lm.n_devices[i] > 0.0 {
                    let dist = rand_distr::Poisson::new(lm.n_devices[i])
                        .map_err(|e| Error::numerical("poisson", format!("{e:?}")))?;
                    let draw: f64 = r.sample(dist);
                    draw
                } else {
                    0.0
                }
            }
        };
        contenders[i] = n_eff.ceil() as u32;
        if cfg.arrival_mode == ArrivalMode::PoissonSampledCoverage {
            p_ground[i] = collision_fixed_point(contenders[i] + 1, &fleet.mac)?;
            let s = crate::mac::saturation_throughput(n_eff, &fleet.mac, lm.p_cov[i], p_ground[i])?;
            injection[i] = if n_eff > 0.0 {
                n_eff * s * lm.p_cov[i] / (n_eff + 1.0)
            } else {
                0.0
            };
        }
        control_rate[i] = lm.n_devices[i] * fleet.traffic.control_prob * fleet.channel.gw_success;
    }
    Ok(GroundParams {
        contenders,
        p_ground,
        injection,
        control_rate,
    })
}

fn run_replication(cfg: &SimConfig, lm: &LinkModel, rep: u32) -> Result<RepResult> {
    let fleet = &cfg.fleet;
    let m = lm.m;
    let gw = lm.gw;
    let t_cfg = &fleet.traffic;
    let k_max = fleet.mac.max_attempts;
    let gp = ground_params(cfg, lm, rep)?;

    let mut rng_air_attempt: Vec<ChaCha8Rng> = (0..m)
        .map(|i| stream(cfg.seed, rep, i, Purpose::AirAttempt))
        .collect();
    let mut rng_air_class: Vec<ChaCha8Rng> = (0..m)
        .map(|i| stream(cfg.seed, rep, i, Purpose::AirClassDraw))
        .collect();
    let mut rng_gnd_attempt: Vec<ChaCha8Rng> = (0..m)
        .map(|i| stream(cfg.seed, rep, i, Purpose::GroundAttempt))
        .collect();
    let mut rng_gnd_class: Vec<ChaCha8Rng> = (0..m)
        .map(|i| stream(cfg.seed, rep, i, Purpose::GroundClassDraw))
        .collect();
    let mut rng_gnd_cov: Vec<ChaCha8Rng> = (0..m)
        .map(|i| stream(cfg.seed, rep, i, Purpose::GroundCoverage))
        .collect();
    let mut rng_gnd_cont: Vec<ChaCha8Rng> = (0..m)
        .map(|i| stream(cfg.seed, rep, i, Purpose::GroundContender))
        .collect();
    let mut rng_inject: Vec<ChaCha8Rng> = (0..m)
        .map(|i| stream(cfg.seed, rep, i, Purpose::Injection))
        .collect();
    let mut rng_cloud = stream(cfg.seed, rep, gw, Purpose::CloudDelivery);
    let mut rng_ack = stream(cfg.seed, rep, gw, Purpose::AckDraw);
    let mut rng_ctl = stream(cfg.seed, rep, gw, Purpose::ControlDraw);
    let mut rng_contact: Vec<ChaCha8Rng> = (0..m)
        .map(|i| stream(cfg.seed, rep, i, Purpose::ContactDraw))
        .collect();

    // Initial angular phases for the geometric contact process.
    let phases0: Vec<f64> = (0..m)
        .map(|i| {
            let mut r = stream(cfg.seed, rep, i, Purpose::InitialPhase);
            r.gen::<f64>() * std::f64::consts::TAU
        })
        .collect();
    let slot_dt = fleet.mac.idle_slot_s;
    let radii: Vec<f64> = fleet.uavs.iter().map(|u| u.rotation_radius_m()).collect();
    let omegas: Vec<f64> = fleet
        .uavs
        .iter()
        .map(|u| u.angular_velocity_radps)
        .collect();

    let mut up_q: Vec<VecDeque<Packet>> = vec![VecDeque::new(); m];
    let mut dn_air_q: Vec<VecDeque<Packet>> = vec![VecDeque::new(); m];
    let mut dn_gnd_q: Vec<VecDeque<Packet>> = vec![VecDeque::new(); m];
    let mut air_cycle: Vec<Option<(AirClass, u32)>> = vec![None; m];
    let mut gnd_cycle: Vec<Option<u32>> = vec![None; m];

    let mut occ_up = vec![0u64; m];
    let mut occ_dn = vec![0u64; m];
    let mut rate_up = vec![0u64; m];
    let mut rate_dn = vec![0u64; m];
    let mut delay_up_sum = vec![0.0; m];
    let mut delay_up_sq = vec![0.0; m];
    let mut delay_up_cnt = vec![0u64; m];
    let mut delay_dn_sum = vec![0.0; m];
    let mut delay_dn_sq = vec![0.0; m];
    let mut delay_dn_cnt = vec![0u64; m];
    let mut ledger_up = vec![Ledger::default(); m];
    let mut ledger_dn = vec![Ledger::default(); m];
    let mut backlog_mid = vec![0u64; m];
    let mut max_attempts_seen = 0u32;

    let mut tx_target: Vec<Option<usize>> = vec![None; m];
    let mut txing = vec![false; m];
    let mut contact_up = vec![true; m]; // contact(i, i+1)

    let mid_slot = cfg.warmup + (cfg.slots - cfg.warmup) / 2;

    for t in 0..cfg.slots {
        let measure = t >= cfg.warmup;
        if measure {
            for i in 0..m {
                if !up_q[i].is_empty() {
                    occ_up[i] += 1;
                }
                if !dn_air_q[i].is_empty() || !dn_gnd_q[i].is_empty() {
                    occ_dn[i] += 1;
                }
            }
        }
        if t == mid_slot {
            for i in 0..m {
                backlog_mid[i] = up_q[i].len() as u64;
            }
        }

        // Contact state of each adjacent pair this slot.
        for i in 0..m.saturating_sub(1) {
            contact_up[i] = match cfg.contact_mode {
                ContactMode::Geometric => {
                    let dphi = (phases0[i] + omegas[i] * slot_dt * t as f64)
                        - (phases0[i + 1] + omegas[i + 1] * slot_dt * t as f64);
                    let d2 = radii[i] * radii[i] + radii[i + 1] * radii[i + 1]
                        - 2.0 * radii[i] * radii[i + 1] * dphi.cos();
                    d2 <= fleet.d_tx_m * fleet.d_tx_m
                }
                ContactMode::BernoulliXi => rng_contact[i].gen::<f64>() < lm.xi_up[i],
            };
        }
        let in_contact = |a: usize, b: usize| -> bool {
            if a + 1 == b {
                contact_up[a]
            } else if b + 1 == a {
                contact_up[b]
            } else {
                false
            }
        };

        // Phase A: every UAV decides whether it occupies its air slot and
        // with which packet. Beacons transmit too; they just carry no queue.
        for i in 0..m {
            tx_target[i] = None;
            txing[i] = false;
            if rng_air_attempt[i].gen::<f64>() >= lm.p_air[i] {
                continue;
            }
            txing[i] = true;
            if air_cycle[i].is_none() {
                let u = rng_air_class[i].gen::<f64>();
                let class = if u < t_cfg.f_uplink_air {
                    // The gateway's uplink leaves on the backhaul, never the air.
                    if i != gw && up_q[i].front().map_or(false, |p| p.eligible <= t) {
                        Some(AirClass::Uplink)
                    } else {
                        None
                    }
                } else if u < t_cfg.f_uplink_air + t_cfg.f_downlink_air {
                    if dn_air_q[i].front().map_or(false, |p| p.eligible <= t) {
                        Some(AirClass::Downlink)
                    } else {
                        None
                    }
                } else {
                    None
                };
                if let Some(c) = class {
                    air_cycle[i] = Some((c, 0));
                }
            }
            if let Some((class, _)) = air_cycle[i] {
                tx_target[i] = Some(match class {
                    AirClass::Uplink => i + 1,
                    AirClass::Downlink => i - 1,
                });
            }
        }

        // Phase B: resolve the simultaneous air transmissions.
        for i in 0..m {
            let Some(j) = tx_target[i] else { continue };
            let mut ok = j < m && in_contact(i, j);
            if ok && !cfg.ideal_air {
                ok = !txing[j];
                if ok {
                    for k in neighbors(j, m) {
                        if k != i && txing[k] && in_contact(k, j) {
                            ok = false;
                            break;
                        }
                    }
                }
            }
            let (class, attempts) = air_cycle[i].take().expect("active cycle");
            let attempts = attempts + 1;
            max_attempts_seen = max_attempts_seen.max(attempts);
            let q = match class {
                AirClass::Uplink => &mut up_q[i],
                AirClass::Downlink => &mut dn_air_q[i],
            };
            if ok {
                let pkt = q.pop_front().expect("cycle packet present");
                match class {
                    AirClass::Uplink => {
                        up_q[j].push_back(Packet {
                            eligible: t + 1,
                            ..pkt
                        });
                    }
                    AirClass::Downlink => {
                        let dest = pkt.stream as usize;
                        let moved = Packet {
                            eligible: t + 1,
                            ..pkt
                        };
                        if dest == j {
                            dn_gnd_q[j].push_back(moved);
                        } else {
                            dn_air_q[j].push_back(moved);
                        }
                    }
                }
            } else if attempts >= k_max {
                let pkt = q.pop_front().expect("cycle packet present");
                match class {
                    AirClass::Uplink => ledger_up[pkt.stream as usize].dropped_retry += 1,
                    AirClass::Downlink => ledger_dn[pkt.stream as usize].dropped_retry += 1,
                }
            } else {
                air_cycle[i] = Some((class, attempts));
            }
        }

        // Ground channel: terminal downlink deliveries, beacons otherwise.
        for i in 0..m {
            if i == gw {
                continue;
            }
            if rng_gnd_attempt[i].gen::<f64>() >= gp.p_ground[i] {
                continue;
            }
            if gnd_cycle[i].is_none() {
                let u = rng_gnd_class[i].gen::<f64>();
                if u < t_cfg.f_downlink_ground
                    && dn_gnd_q[i].front().map_or(false, |p| p.eligible <= t)
                {
                    gnd_cycle[i] = Some(0);
                }
            }
            let Some(attempts) = gnd_cycle[i].take() else {
                continue;
            };
            let attempts = attempts + 1;
            max_attempts_seen = max_attempts_seen.max(attempts);
            let mut ok = rng_gnd_cov[i].gen::<f64>() < lm.p_cov[i];
            if ok {
                for _ in 0..gp.contenders[i] {
                    if rng_gnd_cont[i].gen::<f64>() < gp.p_ground[i] * lm.p_cov[i] {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                let pkt = dn_gnd_q[i].pop_front().expect("cycle packet present");
                ledger_dn[pkt.stream as usize].delivered += 1;
                if measure && pkt.born >= cfg.warmup {
                    rate_dn[pkt.stream as usize] += 1;
                    let hops = (gw - pkt.stream as usize + 1) as f64;
                    let d = (t - pkt.born) as f64 + hops;
                    delay_dn_sum[pkt.stream as usize] += d;
                    delay_dn_sq[pkt.stream as usize] += d * d;
                    delay_dn_cnt[pkt.stream as usize] += 1;
                }
            } else if attempts >= k_max {
                let pkt = dn_gnd_q[i].pop_front().expect("cycle packet present");
                ledger_dn[pkt.stream as usize].dropped_retry += 1;
            } else {
                gnd_cycle[i] = Some(attempts);
            }
        }

        // Gateway backhaul: one departure per slot when non-empty.
        if up_q[gw].front().map_or(false, |p| p.eligible <= t) {
            let pkt = up_q[gw].pop_front().expect("non-empty");
            let s = pkt.stream as usize;
            if rng_cloud.gen::<f64>() < fleet.channel.gw_success {
                ledger_up[s].delivered += 1;
                if measure && pkt.born >= cfg.warmup {
                    rate_up[s] += 1;
                    let hops = (gw - s + 1) as f64;
                    let d = (t - pkt.born) as f64 + hops;
                    delay_up_sum[s] += d;
                    delay_up_sq[s] += d * d;
                    delay_up_cnt[s] += 1;
                }
                if rng_ack.gen::<f64>() < t_cfg.ack_fraction {
                    ledger_dn[s].generated += 1;
                    let pkt = Packet {
                        stream: s as u8,
                        born: t,
                        eligible: t + 1,
                    };
                    if s == gw {
                        dn_gnd_q[gw].push_back(pkt);
                    } else {
                        dn_air_q[gw].push_back(pkt);
                    }
                }
            } else {
                ledger_up[s].dropped_backhaul += 1;
            }
        }

        // Cloud-originated control packets, one Bernoulli per destination cell.
        for d in 0..gw {
            if gp.control_rate[d] > 0.0 && rng_ctl.gen::<f64>() < gp.control_rate[d] {
                ledger_dn[d].generated += 1;
                dn_air_q[gw].push_back(Packet {
                    stream: d as u8,
                    born: t,
                    eligible: t + 1,
                });
            }
        }

        // Uplink injections: scripted points when provided, Bernoulli
        // arrivals at the analytic offered rate otherwise.
        if let Some(script) = &cfg.scripted_injections {
            for &(slot, src) in script {
                if slot == t && src < gw {
                    ledger_up[src].generated += 1;
                    up_q[src].push_back(Packet {
                        stream: src as u8,
                        born: t,
                        eligible: t + 1,
                    });
                }
            }
        } else {
            for i in 0..gw {
                if gp.injection[i] > 0.0 && rng_inject[i].gen::<f64>() < gp.injection[i] {
                    ledger_up[i].generated += 1;
                    up_q[i].push_back(Packet {
                        stream: i as u8,
                        born: t,
                        eligible: t + 1,
                    });
                }
            }
        }

        if t % 4096 == 0 {
            let total: u64 = (0..m)
                .map(|i| (up_q[i].len() + dn_air_q[i].len() + dn_gnd_q[i].len()) as u64)
                .sum();
            if total > QUEUE_WATERMARK {
                return Err(Error::numerical(
                    "simulate",
                    format!("queue watermark exceeded at slot {t}: {total} packets buffered"),
                ));
            }
        }
    }

    // Residual packets per stream close the conservation ledger.
    for i in 0..m {
        for pkt in up_q[i].iter() {
            ledger_up[pkt.stream as usize].residual += 1;
        }
        for pkt in dn_air_q[i].iter().chain(dn_gnd_q[i].iter()) {
            ledger_dn[pkt.stream as usize].residual += 1;
        }
    }
    let measured = (cfg.slots - cfg.warmup) as f64;
    Ok(RepResult {
        occ_up: occ_up.iter().map(|&c| c as f64 / measured).collect(),
        occ_dn: occ_dn.iter().map(|&c| c as f64 / measured).collect(),
        rate_up: rate_up.iter().map(|&c| c as f64 / measured).collect(),
        rate_dn: rate_dn.iter().map(|&c| c as f64 / measured).collect(),
        delay_up_sum,
        delay_up_sq,
        delay_up_cnt,
        delay_dn_sum,
        delay_dn_sq,
        delay_dn_cnt,
        ledger_up,
        ledger_dn,
        backlog_mid,
        backlog_end: (0..m).map(|i| up_q[i].len() as u64).collect(),
        max_attempts_seen,
    })
}
