//! One-call analytic pipeline: derive the link model, solve the steady
//! state, evaluate stream metrics.

use crate::config::FleetConfig;
use crate::error::Result;
use crate::link::LinkModel;
use crate::metrics::{compute_metrics, StreamMetrics};
use crate::steady_state::{solve_steady_state, SteadyState};
use serde::{Deserialize, Serialize};

/// Complete analytic output for one scenario.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalyticReport {
    pub config_hash: String,
    pub link: LinkModel,
    pub steady: SteadyState,
    pub metrics: StreamMetrics,
}

pub fn analyze(fleet: &FleetConfig) -> Result<AnalyticReport> {
    let link = LinkModel::derive(fleet)?;
    let steady = solve_steady_state(fleet, &link)?;
    let metrics = compute_metrics(&steady, &link, fleet);
    Ok(AnalyticReport {
        config_hash: fleet.config_hash(),
        link,
        steady,
        metrics,
    })
}

/// Human-readable report used by the CLI. `slot_duration_s` converts the
/// slot-based delays to seconds; pass `None` to use the idle-slot duration.
pub fn render_text(
    report: &AnalyticReport,
    fleet: &FleetConfig,
    slot_duration_s: Option<f64>,
) -> String {
    let m = report.link.m;
    let gw = report.link.gw;
    let slot = slot_duration_s.unwrap_or(fleet.mac.idle_slot_s);
    let mut out = String::new();
    out.push_str(&format!("config {}\n", report.config_hash));
    out.push_str(&format!(
        "fleet: {} UAVs (gateway = uav{}), solver iterations {}, max residual {:.2e}\n",
        m,
        gw + 1,
        report.steady.iterations,
        report.steady.max_balance_residual
    ));
    let (c_hi, c_lo, c_cov) = report.link.clamp_events;
    out.push_str(&format!(
        "clamp events: los_high={c_hi} los_low={c_lo} coverage={c_cov}\n\n"
    ));
    out.push_str(
        "uav  n_devices  p_cov     p_air    p_ground  sat_thr    upl_load  dnl_load  stable\n",
    );
    for i in 0..m {
        out.push_str(&format!(
            "{:<4} {:<10.4} {:<9.5} {:<8.5} {:<9.5} {:<10.6} {:<9.5} {:<9.5} {}\n",
            i + 1,
            report.link.n_devices[i],
            report.link.p_cov[i],
            report.link.p_air[i],
            report.link.p_ground[i],
            report.link.sat_throughput[i],
            report.steady.queue_load_up[i],
            report.steady.queue_load_down[i],
            if report.steady.stable_up[i]
                && report.steady.stable_down_air[i]
                && report.steady.stable_down_ground[i]
            {
                "yes"
            } else {
                "no"
            }
        ));
    }
    out.push_str(
        "\nstream  theta_up      delay_up[slots]  delay_up[s]   theta_down    delay_down[slots]\n",
    );
    for s in 0..gw {
        let du = report.metrics.delay_up[s];
        let dd = report.metrics.delay_down[s];
        out.push_str(&format!(
            "{:<7} {:<13.6e} {:<16.4} {:<13.6e} {:<13.6e} {:<16.4}\n",
            s + 1,
            report.metrics.theta_up[s],
            du,
            if du.is_finite() {
                du * slot
            } else {
                f64::INFINITY
            },
            report.metrics.theta_down[s],
            dd,
        ));
    }
    out
}
