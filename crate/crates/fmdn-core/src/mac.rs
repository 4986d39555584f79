//! DCF MAC layer: attempt probability with its collision fixed point,
//! per-link success probabilities, truncated-retry attempt moments,
//! service-time moments, and saturation throughput.

use crate::config::MacParams;
use crate::error::{Error, Result};

/// Attempt/service statistics of one link class.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct LinkStats {
    /// Per-slot attempt probability of the transmitter.
    pub p_attempt: f64,
    /// Per-attempt success probability.
    pub p_success: f64,
    /// Expected attempts per packet (1 <= L <= K).
    pub attempts: f64,
    /// Second moment of attempts per packet.
    pub attempts_sq: f64,
    /// Expected service slots tau = L / p.
    pub service: f64,
    /// Second moment of service slots.
    pub service_sq: f64,
}

impl LinkStats {
    pub fn from_success(p_attempt: f64, p_success: f64, max_attempts: u32) -> Result<Self> {
        let (attempts, attempts_sq) = attempts_per_packet(p_success, max_attempts);
        let (service, service_sq) = service_moments(attempts, attempts_sq, p_attempt)?;
        Ok(LinkStats {
            p_attempt,
            p_success,
            attempts,
            attempts_sq,
            service,
            service_sq,
        })
    }

    /// Single-shot broadcast class (beacons): exactly one attempt per packet.
    pub fn single_attempt(p_attempt: f64) -> Result<Self> {
        let (service, service_sq) = service_moments(1.0, 1.0, p_attempt)?;
        Ok(LinkStats {
            p_attempt,
            p_success: 1.0,
            attempts: 1.0,
            attempts_sq: 1.0,
            service,
            service_sq,
        })
    }

    /// Mean residual service seen by a random arrival, in slots:
    /// tau2 / (2 tau) + 1/2.
    pub fn residual(&self) -> f64 {
        self.service_sq / (2.0 * self.service) + 0.5
    }

    /// Probability the packet is delivered within the retry budget.
    pub fn survival(&self, max_attempts: u32) -> f64 {
        1.0 - (1.0 - self.p_success).powi(max_attempts as i32)
    }
}

/// Per-slot attempt probability of the binary-exponential-backoff DCF:
/// p = 2(1-2pc) / ((1-2pc)(W+1) + pc W (1-(2pc)^b)),
/// with the removable singularity at pc = 1/2 evaluated analytically.
pub fn attempt_probability(p_collision: f64, mac: &MacParams) -> f64 {
    let w = mac.min_contention_window as f64;
    let b = mac.max_backoff_stage as f64;
    let pc = p_collision;
    if (pc - 0.5).abs() < 1e-9 {
        // L'Hopital limit: 2 / ((W+1) + W b / 2).
        return 2.0 / ((w + 1.0) + w * b / 2.0);
    }
    let num = 2.0 * (1.0 - 2.0 * pc);
    let den = (1.0 - 2.0 * pc) * (w + 1.0) + pc * w * (1.0 - (2.0 * pc).powf(b));
    num / den
}

/// Solve the coupled pair {p = attempt(pc), pc = 1 - (1-p)^(n-1)} for a
/// symmetric set of `contenders` nodes, by damped iteration.
pub fn collision_fixed_point(contenders: u32, mac: &MacParams) -> Result<f64> {
    if contenders <= 1 {
        // A lone node never collides.
        return Ok(attempt_probability(0.0, mac));
    }
    let others = (contenders - 1) as f64;
    let mut p = attempt_probability(0.0, mac);
    for _ in 0..500 {
        let pc = 1.0 - (1.0 - p).powf(others);
        let next = attempt_probability(pc, mac);
        let damped = 0.5 * p + 0.5 * next;
        if (damped - p).abs() < 1e-10 {
            return Ok(damped);
        }
        p = damped;
    }
    Err(Error::numerical(
        "collision_fixed_point",
        format!("no convergence for {contenders} contenders"),
    ))
}

/// Per-slot success probability of an air link i -> j:
/// P = p_i * xi_ij * (1 - p_j) * prod_{k in Ng(j)\i} (1 - p_k * xi_kj).
///
/// `neighbor_terms` carries (p_k, xi_kj) for every interfering neighbor of
/// the receiver other than the transmitter.
pub fn air_success(p_tx: f64, xi_tx_rx: f64, p_rx: f64, neighbor_terms: &[(f64, f64)]) -> f64 {
    let mut prob = p_tx * xi_tx_rx * (1.0 - p_rx);
    for &(p_k, xi_k) in neighbor_terms {
        prob *= 1.0 - p_k * xi_k;
    }
    prob
}

/// Per-slot success probability on the ground channel for a tagged
/// transmitter among ceil(n) other contenders:
/// P = p * P_cov * (1 - p * P_cov)^ceil(n).
pub fn ground_success(n_devices: f64, p_ground: f64, p_cov: f64) -> f64 {
    let contenders = n_devices.ceil() as i32;
    p_ground * p_cov * (1.0 - p_ground * p_cov).powi(contenders)
}

/// First and second moments of the attempt count of a truncated-retry
/// process: N = min(Geometric(P), K).
pub fn attempts_per_packet(p_success: f64, max_attempts: u32) -> (f64, f64) {
    let k = max_attempts;
    let p = p_success.clamp(0.0, 1.0);
    if p >= 1.0 {
        return (1.0, 1.0);
    }
    // The closed forms cancel catastrophically for small P; the direct
    // truncated-geometric sums are exact and cheap there.
    if p < 1e-4 || k <= 64 {
        let q = 1.0 - p;
        let mut m1 = 0.0;
        let mut m2 = 0.0;
        let mut qpow = 1.0; // q^(j-1)
        for j in 1..k {
            let pj = qpow * p;
            let jf = j as f64;
            m1 += jf * pj;
            m2 += jf * jf * pj;
            qpow *= q;
        }
        let kf = k as f64;
        m1 += kf * qpow;
        m2 += kf * kf * qpow;
        return (m1, m2);
    }
    let q = 1.0 - p;
    let qk = q.powi(k as i32);
    let l = (1.0 - qk) / p;
    let kf = k as f64;
    let l2 = l + 2.0 * q / (p * p) - 2.0 * qk * (kf - q * (kf - 1.0)) / (p * p);
    (l, l2)
}

/// Service-time moments in slots given attempt moments and the per-slot
/// attempt probability: tau = L/p, tau2 = (L2 + L(1-p)) / p^2.
pub fn service_moments(attempts: f64, attempts_sq: f64, p_attempt: f64) -> Result<(f64, f64)> {
    if !(p_attempt > 0.0 && p_attempt <= 1.0) {
        return Err(Error::config("p_attempt", "must be in (0, 1]"));
    }
    let tau = attempts / p_attempt;
    let tau2 = (attempts_sq + attempts * (1.0 - p_attempt)) / (p_attempt * p_attempt);
    Ok((tau, tau2))
}

/// Normalized saturation throughput of one UAV cell with expected device
/// count `n`: S = Ps * T_payload / ((1-Ptr) sigma + Ps Ts + (Ptr - Ps) Tc),
/// where the effective per-node transmission probability is p * P_cov.
pub fn saturation_throughput(
    n_devices: f64,
    mac: &MacParams,
    p_cov: f64,
    p_ground: f64,
) -> Result<f64> {
    let contenders = n_devices.ceil() as i32 + 1;
    let te = p_ground * p_cov;
    let p_tr = 1.0 - (1.0 - te).powi(contenders);
    let p_s = contenders as f64 * te * (1.0 - te).powi(contenders - 1);
    let t_payload = mac.payload_bits / mac.bitrate_bps;
    let denom = (1.0 - p_tr) * mac.idle_slot_s
        + p_s * mac.success_time_s
        + (p_tr - p_s) * mac.collision_time_s;
    if denom <= 0.0 {
        return Err(Error::config(
            "mac",
            "slot durations define a zero-length cycle",
        ));
    }
    Ok(p_s * t_payload / denom)
}
