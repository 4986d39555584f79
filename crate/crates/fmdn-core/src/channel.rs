//! Air-to-ground channel model: LoS probability, link budget, and the
//! coverage-probability integral.

use crate::config::ChannelParams;
use crate::error::{Error, Result};
use crate::quad::integrate_adaptive;
use std::f64::consts::PI;
use std::sync::atomic::{AtomicU64, Ordering};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Upper edge of the LoS model's angular domain (5 pi / 12).
pub const LOS_ANGLE_LIMIT: f64 = 5.0 * PI / 12.0;

const QUAD_REL_TOL: f64 = 1e-8;

/// Counts how often raw model outputs had to be clamped into [0, 1]. The
/// published LoS constants exceed 1 at small angles, so clamping is expected
/// and surfaced rather than silent.
#[derive(Debug, Default)]
pub struct ClampCounter {
    pub los_high: AtomicU64,
    pub los_low: AtomicU64,
    pub coverage: AtomicU64,
}

impl ClampCounter {
    pub fn snapshot(&self) -> (u64, u64, u64) {
        (
            self.los_high.load(Ordering::Relaxed),
            self.los_low.load(Ordering::Relaxed),
            self.coverage.load(Ordering::Relaxed),
        )
    }
}

/// Gaussian tail probability Q(x) = P[N(0,1) > x].
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// LoS probability at elevation-complement angle `theta_e`:
/// beta1 * (5 pi / 12 - theta_e)^beta2, clamped to [0, 1] with counting.
pub fn p_los(theta_e: f64, c: &ChannelParams, clamps: &ClampCounter) -> Result<f64> {
    if theta_e < 0.0 || theta_e > LOS_ANGLE_LIMIT {
        return Err(Error::config(
            "theta_e",
            format!("angle {theta_e} outside [0, 5*pi/12]"),
        ));
    }
    Ok(p_los_clamped(theta_e, c, clamps))
}

/// Same as [`p_los`] but with the base extended by zero past the domain edge,
/// used inside the coverage integrand for wide apertures.
fn p_los_clamped(theta: f64, c: &ChannelParams, clamps: &ClampCounter) -> f64 {
    let base = LOS_ANGLE_LIMIT - theta;
    if base <= 0.0 {
        clamps.los_low.fetch_add(1, Ordering::Relaxed);
        return 0.0;
    }
    let raw = c.beta1 * base.powf(c.beta2);
    if raw > 1.0 {
        clamps.los_high.fetch_add(1, Ordering::Relaxed);
        1.0
    } else if raw < 0.0 {
        clamps.los_low.fetch_add(1, Ordering::Relaxed);
        0.0
    } else {
        raw
    }
}

/// Link budget psi(d) = 10 log10( Pt / (N0 * L_f * SNR_th) ) in dB, with
/// L_f = (4 pi f d / c)^2 and the dBm/dB inputs converted to linear first.
pub fn link_budget_psi(distance_m: f64, c: &ChannelParams) -> Result<f64> {
    if !(distance_m > 0.0) {
        return Err(Error::config("distance_m", "must be > 0"));
    }
    let pt_mw = dbm_to_linear(c.tx_power_dbm);
    let n0_mw = dbm_to_linear(c.noise_dbm);
    let snr_lin = db_to_linear(c.snr_threshold_db);
    let lf = {
        let x = 4.0 * PI * c.frequency_hz * distance_m / SPEED_OF_LIGHT;
        x * x
    };
    Ok(10.0 * (pt_mw / (n0_mw * lf * snr_lin)).log10())
}

/// Coverage probability of a UAV at altitude `h` with aperture `theta` over
/// device density `lambda`, by adaptive quadrature of the angular integral.
pub fn coverage_probability(
    h: f64,
    theta: f64,
    lambda: f64,
    c: &ChannelParams,
    clamps: &ClampCounter,
) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::config("altitude", "must be > 0"));
    }
    if !(theta > 0.0 && theta < PI) {
        return Err(Error::config("aperture", "must be in (0, pi)"));
    }
    if lambda == 0.0 {
        return Ok(0.0);
    }
    // The LoS factor vanishes identically beyond its angular domain, so wide
    // apertures integrate only up to that edge; integrating across it would
    // drag a kink through the quadrature panels.
    let half = (theta / 2.0).min(LOS_ANGLE_LIMIT);
    let scale = 2.0 * PI * lambda * h * h;
    let integrand = |t: f64| -> f64 {
        let cos_t = t.cos();
        if cos_t <= 1e-9 {
            return 0.0;
        }
        let d = h / cos_t;
        let psi = {
            // inlined link budget; d > 0 by construction
            let pt_mw = dbm_to_linear(c.tx_power_dbm);
            let n0_mw = dbm_to_linear(c.noise_dbm);
            let snr_lin = db_to_linear(c.snr_threshold_db);
            let x = 4.0 * PI * c.frequency_hz * d / SPEED_OF_LIGHT;
            10.0 * (pt_mw / (n0_mw * x * x * snr_lin)).log10()
        };
        let sigma = c.a_los * (c.b_los * t).exp();
        let tail = q_function((c.mu_los_db - psi) / sigma);
        let los = p_los_clamped(t, c, clamps);
        let tan_t = t.tan();
        tail * los
            * (t.sin() / (cos_t * cos_t * cos_t))
            * (-lambda * PI * h * h * tan_t * tan_t).exp()
    };
    // Where the raw LoS value crosses 1, the clamp leaves a derivative kink;
    // splitting the domain there keeps both pieces smooth for the panels.
    let clamp_edge = if c.beta1 > 1.0 {
        LOS_ANGLE_LIMIT - (1.0 / c.beta1).powf(1.0 / c.beta2)
    } else {
        0.0
    };
    let raw = if clamp_edge > 0.0 && clamp_edge < half {
        scale
            * (integrate_adaptive(
                &integrand,
                0.0,
                clamp_edge,
                QUAD_REL_TOL,
                "coverage_probability",
            )? + integrate_adaptive(
                &integrand,
                clamp_edge,
                half,
                QUAD_REL_TOL,
                "coverage_probability",
            )?)
    } else {
        scale * integrate_adaptive(&integrand, 0.0, half, QUAD_REL_TOL, "coverage_probability")?
    };
    if raw > 1.0 {
        clamps.coverage.fetch_add(1, Ordering::Relaxed);
        Ok(1.0)
    } else if raw < 0.0 {
        clamps.coverage.fetch_add(1, Ordering::Relaxed);
        Ok(0.0)
    } else {
        Ok(raw)
    }
}

pub fn dbm_to_linear(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
