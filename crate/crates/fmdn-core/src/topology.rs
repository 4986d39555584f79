//! Circular-trajectory geometry: coverage footprints, expected covered
//! device counts, and pairwise contact probabilities.

use crate::config::UavParams;
use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Radius of the ground disk covered at one stop: r_c = h * tan(theta / 2).
/// The gateway covers nothing.
pub fn coverage_radius(u: &UavParams) -> f64 {
    if u.is_gateway {
        return 0.0;
    }
    u.altitude_m * (u.aperture_rad / 2.0).tan()
}

/// Expected number of devices covered at one stop under a homogeneous PPP of
/// density `lambda`: n = lambda * pi * tan^2(theta/2) * h^2. Kept as a real
/// valued expectation, never rounded.
pub fn covered_count(u: &UavParams, lambda: f64) -> f64 {
    if u.is_gateway {
        return 0.0;
    }
    let t = (u.aperture_rad / 2.0).tan();
    lambda * PI * t * t * u.altitude_m * u.altitude_m
}

/// Devices covered over one full round trip: N = (4 pi r / r_c) * n.
pub fn covered_per_roundtrip(u: &UavParams, lambda: f64) -> Result<f64> {
    if u.is_gateway {
        return Err(Error::config("uav", "the gateway covers no ground devices"));
    }
    let rc = coverage_radius(u);
    if !(rc > 0.0) {
        return Err(Error::config("uav", "coverage radius must be positive"));
    }
    Ok(4.0 * PI * u.rotation_radius_m() / rc * covered_count(u, lambda))
}

/// Long-run fraction of time two UAVs on concentric circles of radii `r_i`
/// and `r_j` are within range `d_tx`, with the relative phase treated as
/// uniform on [0, 2pi).
pub fn contact_probability_radii(r_i: f64, r_j: f64, d_tx: f64) -> f64 {
    if d_tx >= r_i + r_j {
        return 1.0;
    }
    if d_tx <= (r_i - r_j).abs() {
        return 0.0;
    }
    let cos_arg = (r_i * r_i + r_j * r_j - d_tx * d_tx) / (2.0 * r_i * r_j);
    (cos_arg.clamp(-1.0, 1.0).acos() / PI).clamp(0.0, 1.0)
}

/// Contact probability between two UAVs of a fleet.
pub fn contact_probability(i: &UavParams, j: &UavParams, d_tx: f64) -> f64 {
    contact_probability_radii(i.rotation_radius_m(), j.rotation_radius_m(), d_tx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn uav(h: f64, theta: f64, v: f64, omega: f64) -> UavParams {
        UavParams {
            id: 1,
            altitude_m: h,
            aperture_rad: theta,
            velocity_mps: v,
            angular_velocity_radps: omega,
            is_gateway: false,
        }
    }

    #[test]
    fn coverage_radius_right_angle_aperture() {
        // tan(pi/4) = 1, so the footprint radius equals the altitude.
        assert_abs_diff_eq!(
            coverage_radius(&uav(20.0, PI / 2.0, 20.0, 8.0)),
            20.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn coverage_radius_narrow_aperture() {
        // 20 * tan(pi/8)
        assert_abs_diff_eq!(
            coverage_radius(&uav(20.0, PI / 4.0, 20.0, 8.0)),
            8.2842712474619,
            epsilon = 1e-10
        );
    }

    #[test]
    fn gateway_covers_nothing() {
        let mut g = uav(20.0, PI / 2.0, 20.0, 8.0);
        g.is_gateway = true;
        assert_eq!(coverage_radius(&g), 0.0);
        assert_eq!(covered_count(&g, 1e-3), 0.0);
        assert!(covered_per_roundtrip(&g, 1e-3).is_err());
    }

    #[test]
    fn covered_count_reference_value() {
        // 1e-3 * pi * 1 * 400
        assert_abs_diff_eq!(
            covered_count(&uav(20.0, PI / 2.0, 20.0, 8.0), 1e-3),
            1.256637061435917,
            epsilon = 1e-12
        );
        assert_eq!(covered_count(&uav(20.0, PI / 2.0, 20.0, 8.0), 0.0), 0.0);
    }

    #[test]
    fn covered_per_roundtrip_reference_value() {
        // r = 2.5, r_c = 20: 4 pi 2.5 / 20 * n = 1.9739...
        let u = uav(20.0, PI / 2.0, 20.0, 8.0);
        assert_abs_diff_eq!(
            covered_per_roundtrip(&u, 1e-3).unwrap(),
            4.0 * PI * 2.5 / 20.0 * 1.256637061435917,
            epsilon = 1e-12
        );
        assert_eq!(covered_per_roundtrip(&u, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn contact_probability_boundary_cases() {
        // Homogeneous reference fleet: r_i = r_j = 2.5, d_tx = 15 covers always.
        assert_eq!(contact_probability_radii(2.5, 2.5, 15.0), 1.0);
        // Range below the radial gap: never in contact.
        assert_eq!(contact_probability_radii(10.0, 20.0, 5.0), 0.0);
    }

    #[test]
    fn contact_probability_arc_value() {
        // arccos(275/400)/pi
        assert_abs_diff_eq!(
            contact_probability_radii(10.0, 20.0, 15.0),
            0.2587081302345013,
            epsilon = 1e-12
        );
    }

    #[test]
    fn covered_count_scaling_laws() {
        let base = covered_count(&uav(20.0, PI / 3.0, 20.0, 8.0), 1e-3);
        let lam2 = covered_count(&uav(20.0, PI / 3.0, 20.0, 8.0), 2e-3);
        let h2 = covered_count(&uav(40.0, PI / 3.0, 20.0, 8.0), 1e-3);
        assert_abs_diff_eq!(lam2 / base, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(h2 / base, 4.0, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn contact_symmetric_and_bounded(
            r_i in 0.5f64..50.0, r_j in 0.5f64..50.0, d in 0.1f64..120.0
        ) {
            let a = contact_probability_radii(r_i, r_j, d);
            let b = contact_probability_radii(r_j, r_i, d);
            prop_assert!((a - b).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&a));
        }

        #[test]
        fn contact_non_decreasing_in_range(
            r_i in 0.5f64..50.0, r_j in 0.5f64..50.0,
            d1 in 0.1f64..120.0, d2 in 0.1f64..120.0
        ) {
            let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
            let a = contact_probability_radii(r_i, r_j, lo);
            let b = contact_probability_radii(r_i, r_j, hi);
            prop_assert!(a <= b + 1e-12);
        }
    }
}
