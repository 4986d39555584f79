//! Monte-Carlo and enumeration oracles: independent reimplementations of the
//! closed forms, kept strictly to sampling plus elementary arithmetic so they
//! cannot share a bug with the library path they check.

use fmdn_core::channel::{coverage_probability, ClampCounter};
use fmdn_core::config::FleetConfig;
use fmdn_core::mac::{
    attempts_per_packet, collision_fixed_point, ground_success, saturation_throughput,
    service_moments,
};
use fmdn_core::topology::contact_probability_radii;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

#[test]
fn contact_probability_vs_uniform_phase_sampling() {
    // 10 random geometry triples, one million phase samples each; the
    // analytic arc fraction must sit within three binomial standard errors.
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
    const SAMPLES: u64 = 1_000_000;
    for case in 0..10 {
        let r_i = 1.0 + 29.0 * rng.gen::<f64>();
        let r_j = 1.0 + 29.0 * rng.gen::<f64>();
        let d_tx = 0.5 + 69.5 * rng.gen::<f64>();
        let p = contact_probability_radii(r_i, r_j, d_tx);
        let mut hits = 0u64;
        for _ in 0..SAMPLES {
            let phase = rng.gen::<f64>() * std::f64::consts::TAU;
            let d2 = r_i * r_i + r_j * r_j - 2.0 * r_i * r_j * phase.cos();
            if d2 <= d_tx * d_tx {
                hits += 1;
            }
        }
        let emp = hits as f64 / SAMPLES as f64;
        let tol = 3.0 * (p * (1.0 - p) / SAMPLES as f64).sqrt();
        assert!(
            (p - emp).abs() <= tol.max(1e-9),
            "case {case}: r_i={r_i:.3} r_j={r_j:.3} d={d_tx:.3} analytic={p:.6} empirical={emp:.6}"
        );
    }
}

#[test]
fn coverage_probability_vs_monte_carlo_integration() {
    // Rewrite the coverage integrand from scratch and integrate it by
    // uniform sampling of the angle; compare against the quadrature result.
    let c = FleetConfig::reference_scenario().channel;
    let lambda = 4.0e-4;
    let theta = PI / 2.0;
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    const SAMPLES: u64 = 2_000_000;
    for h in [10.0, 20.0, 40.0] {
        let clamps = ClampCounter::default();
        let quadrature = coverage_probability(h, theta, lambda, &c, &clamps).unwrap();
        let half = theta / 2.0;
        let mut acc = 0.0;
        for _ in 0..SAMPLES {
            let t: f64 = rng.gen::<f64>() * half;
            let d = h / t.cos();
            let pt = 10f64.powf(c.tx_power_dbm / 10.0);
            let n0 = 10f64.powf(c.noise_dbm / 10.0);
            let snr = 10f64.powf(c.snr_threshold_db / 10.0);
            let lf = {
                let x = 4.0 * PI * c.frequency_hz * d / 299_792_458.0;
                x * x
            };
            let psi = 10.0 * (pt / (n0 * lf * snr)).log10();
            let sigma = c.a_los * (c.b_los * t).exp();
            let tail = 0.5 * libm::erfc((c.mu_los_db - psi) / sigma / std::f64::consts::SQRT_2);
            let los = (c.beta1 * (5.0 * PI / 12.0 - t).powf(c.beta2)).clamp(0.0, 1.0);
            let tan_t = t.tan();
            acc += tail
                * los
                * (t.sin() / t.cos().powi(3))
                * (-lambda * PI * h * h * tan_t * tan_t).exp();
        }
        let mc = 2.0 * PI * lambda * h * h * half * acc / SAMPLES as f64;
        assert!(
            (quadrature - mc).abs() <= 1e-3,
            "h={h}: quadrature={quadrature:.6} mc={mc:.6}"
        );
    }
}

#[test]
fn service_moments_vs_slot_level_monte_carlo() {
    // Ten random (success, retry limit, attempt probability) points; the
    // closed-form service moments must match a direct simulation of the
    // truncated-retry attempt process within three standard errors.
    let mut rng = ChaCha8Rng::seed_from_u64(777);
    const PACKETS: u64 = 1_000_000;
    for case in 0..10 {
        let p_succ = 0.15 + 0.8 * rng.gen::<f64>();
        let k: u32 = 1 + (rng.gen::<f64>() * 6.0) as u32;
        let p_att = 0.1 + 0.85 * rng.gen::<f64>();
        let (l, l2) = attempts_per_packet(p_succ, k);
        let (tau, tau2) = service_moments(l, l2, p_att).unwrap();
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        let mut sum_p4 = 0.0;
        for _ in 0..PACKETS {
            let mut slots = 0u64;
            for attempt in 1..=k {
                // Slots until the next attempt, geometric with success p_att.
                loop {
                    slots += 1;
                    if rng.gen::<f64>() < p_att {
                        break;
                    }
                }
                if rng.gen::<f64>() < p_succ || attempt == k {
                    break;
                }
            }
            let s = slots as f64;
            sum += s;
            sum_sq += s * s;
            sum_p4 += s * s * s * s;
        }
        let n = PACKETS as f64;
        let mean = sum / n;
        let mean_sq = sum_sq / n;
        let mean_p4 = sum_p4 / n;
        let se_mean = ((mean_sq - mean * mean).max(0.0) / n).sqrt();
        assert!(
            (tau - mean).abs() <= 3.0 * se_mean.max(1e-9),
            "case {case}: tau={tau:.4} empirical={mean:.4} se={se_mean:.5}"
        );
        let se_second = ((mean_p4 - mean_sq * mean_sq).max(0.0) / n).sqrt();
        assert!(
            (tau2 - mean_sq).abs() <= 3.0 * se_second.max(1e-9),
            "case {case}: tau2={tau2:.4} empirical={mean_sq:.4} se={se_second:.5}"
        );
    }
}

#[test]
fn saturation_throughput_vs_slot_level_dcf_monte_carlo() {
    // Slot-level contention among ceil(n)+1 saturated effective transmitters:
    // idle slots cost sigma, lone transmissions T_s, collisions T_c. The
    // closed form must match the simulated channel-time share of payload.
    let mac = FleetConfig::reference_scenario().mac;
    let n = 5.0;
    let p_cov = 0.9;
    let p_g = collision_fixed_point(6, &mac).unwrap();
    let s_formula = saturation_throughput(n, &mac, p_cov, p_g).unwrap();
    let contenders = n.ceil() as u32 + 1;
    let te = p_g * p_cov;
    let t_payload = mac.payload_bits / mac.bitrate_bps;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut batch_vals = Vec::new();
    for _batch in 0..10 {
        let mut time = 0.0;
        let mut payload_time = 0.0;
        for _ in 0..400_000u32 {
            let mut tx = 0u32;
            for _ in 0..contenders {
                if rng.gen::<f64>() < te {
                    tx += 1;
                }
            }
            time += match tx {
                0 => mac.idle_slot_s,
                1 => {
                    payload_time += t_payload;
                    mac.success_time_s
                }
                _ => mac.collision_time_s,
            };
        }
        batch_vals.push(payload_time / time);
    }
    let mean = batch_vals.iter().sum::<f64>() / batch_vals.len() as f64;
    let var = batch_vals
        .iter()
        .map(|v| (v - mean) * (v - mean))
        .sum::<f64>()
        / (batch_vals.len() - 1) as f64;
    let se = (var / batch_vals.len() as f64).sqrt();
    assert!(
        (s_formula - mean).abs() <= (4.0 * se).max(2e-4),
        "formula={s_formula:.6} mc={mean:.6} se={se:.2e}"
    );
}

#[test]
fn ground_success_vs_exhaustive_enumeration() {
    // Three-node cell (tagged transmitter plus two contenders): enumerate
    // every transmit pattern and sum the mass where the tagged transmission
    // is the only effective one.
    let p = 0.25f64;
    let p_cov = 1.0;
    let te = p * p_cov;
    let mut win = 0.0;
    for a in [false, true] {
        for b in [false, true] {
            let pa = if a { te } else { 1.0 - te };
            let pb = if b { te } else { 1.0 - te };
            if !a && !b {
                win += te * pa * pb; // tagged transmits, both silent
            }
        }
    }
    assert!((ground_success(2.0, p, p_cov) - win).abs() < 1e-12);
}

#[test]
fn attempt_moments_vs_exhaustive_enumeration() {
    // Truncated geometric with K = 4: enumerate the four outcomes directly.
    let p = 0.37f64;
    let k = 4u32;
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    for j in 1..=k {
        let prob = if j < k {
            (1.0 - p).powi(j as i32 - 1) * p
        } else {
            (1.0 - p).powi(k as i32 - 1)
        };
        m1 += j as f64 * prob;
        m2 += (j as f64) * (j as f64) * prob;
    }
    let (l, l2) = attempts_per_packet(p, k);
    assert!((l - m1).abs() < 1e-12 && (l2 - m2).abs() < 1e-12);
}
