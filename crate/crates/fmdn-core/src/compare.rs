//! Analytic-versus-simulation comparison with per-metric tolerances.

use crate::analysis::AnalyticReport;
use crate::error::{Error, Result};
use crate::sim::SimMeasurements;
use serde::Serialize;

/// Default tolerances of the validation gate: absolute on loads, relative on
/// throughput and delay.
pub const LOAD_TOLERANCE_ABS: f64 = 0.05;
pub const THROUGHPUT_TOLERANCE_REL: f64 = 0.10;
pub const DELAY_TOLERANCE_REL: f64 = 0.15;

#[derive(Debug, Clone, Serialize)]
pub struct CompareRow {
    pub metric: String,
    pub entity: String,
    pub analytic: f64,
    pub sim: f64,
    pub sim_stderr: f64,
    pub abs_err: f64,
    pub rel_err: f64,
    pub tolerance: String,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub config_hash: String,
    pub rows: Vec<CompareRow>,
    /// Per-UAV saturation verdicts: (analytic unstable, simulated growth).
    pub saturation: Vec<SaturationRow>,
    pub all_pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SaturationRow {
    pub uav: u32,
    pub analytic_unstable: bool,
    pub sim_backlog_mid: f64,
    pub sim_backlog_end: f64,
    pub sim_growing: bool,
    pub consistent: bool,
}

/// Build the comparison. Fails with a usage error when the two artifacts
/// were not produced from the same configuration.
pub fn compare(analytic: &AnalyticReport, sim: &SimMeasurements) -> Result<ComparisonReport> {
    if analytic.config_hash != sim.config_hash {
        return Err(Error::Usage(format!(
            "config hash mismatch: analytic {} vs sim {}",
            analytic.config_hash, sim.config_hash
        )));
    }
    let m = analytic.link.m;
    let gw = analytic.link.gw;
    let mut rows = Vec::new();
    for i in 0..m {
        let ana = analytic.steady.queue_load_up[i];
        let s = sim.uplink_load[i];
        let abs = (ana - s.mean).abs();
        rows.push(CompareRow {
            metric: "uplink_load".into(),
            entity: format!("uav{}", i + 1),
            analytic: ana,
            sim: s.mean,
            sim_stderr: s.stderr,
            abs_err: abs,
            rel_err: if s.mean != 0.0 {
                abs / s.mean.abs()
            } else {
                0.0
            },
            tolerance: format!("abs<={LOAD_TOLERANCE_ABS}"),
            pass: abs <= LOAD_TOLERANCE_ABS,
        });
    }
    for s_idx in 0..gw {
        let ana = analytic.metrics.theta_up[s_idx];
        let s = sim.theta_up[s_idx];
        let abs = (ana - s.mean).abs();
        let rel = if s.mean != 0.0 {
            abs / s.mean.abs()
        } else if ana == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        rows.push(CompareRow {
            metric: "theta_up".into(),
            entity: format!("up{}", s_idx + 1),
            analytic: ana,
            sim: s.mean,
            sim_stderr: s.stderr,
            abs_err: abs,
            rel_err: rel,
            tolerance: format!("rel<={THROUGHPUT_TOLERANCE_REL}"),
            pass: rel <= THROUGHPUT_TOLERANCE_REL,
        });
    }
    // Delay is only comparable on stable routes with delivered samples.
    for s_idx in 0..gw {
        let ana = analytic.metrics.delay_up[s_idx];
        let sim_d = &sim.delay_up[s_idx];
        if !ana.is_finite() || sim_d.count == 0 {
            continue;
        }
        let abs = (ana - sim_d.mean).abs();
        let rel = abs / sim_d.mean;
        rows.push(CompareRow {
            metric: "delay_up".into(),
            entity: format!("up{}", s_idx + 1),
            analytic: ana,
            sim: sim_d.mean,
            sim_stderr: sim_d.stderr,
            abs_err: abs,
            rel_err: rel,
            tolerance: format!("rel<={DELAY_TOLERANCE_REL}"),
            pass: rel <= DELAY_TOLERANCE_REL,
        });
    }
    // Saturation consistency: a queue the solver clamps must grow in the
    // simulator, a stable one must stay bounded.
    let mut saturation = Vec::new();
    for i in 0..m {
        let analytic_unstable = !analytic.steady.stable_up[i];
        let mid = sim.backlog_mid[i];
        let end = sim.backlog_end[i];
        // Growth test over the last half of the horizon: the backlog must
        // keep rising markedly; bounded queues hover around a small level.
        let sim_growing = end > 1.5 * mid.max(1.0) && end > 50.0;
        saturation.push(SaturationRow {
            uav: i as u32 + 1,
            analytic_unstable,
            sim_backlog_mid: mid,
            sim_backlog_end: end,
            sim_growing,
            consistent: analytic_unstable == sim_growing,
        });
    }
    let all_pass = rows.iter().all(|r| r.pass) && saturation.iter().all(|s| s.consistent);
    Ok(ComparisonReport {
        config_hash: analytic.config_hash.clone(),
        rows,
        saturation,
        all_pass,
    })
}

/// Plain-text rendering, one line per metric row.
pub fn render_text(report: &ComparisonReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("config {}\n", report.config_hash));
    out.push_str(
        "metric        entity  analytic      sim           abs_err    rel_err    verdict\n",
    );
    for r in &report.rows {
        out.push_str(&format!(
            "{:<13} {:<7} {:<13.6e} {:<13.6e} {:<10.4e} {:<10.4e} {}\n",
            r.metric,
            r.entity,
            r.analytic,
            r.sim,
            r.abs_err,
            r.rel_err,
            if r.pass { "pass" } else { "FAIL" }
        ));
    }
    for s in &report.saturation {
        out.push_str(&format!(
            "saturation    uav{}    analytic_unstable={} sim_growing={} backlog {:.1}->{:.1} {}\n",
            s.uav,
            s.analytic_unstable,
            s.sim_growing,
            s.sim_backlog_mid,
            s.sim_backlog_end,
            if s.consistent {
                "consistent"
            } else {
                "INCONSISTENT"
            }
        ));
    }
    out.push_str(if report.all_pass {
        "ALL PASS\n"
    } else {
        "FAILURES PRESENT\n"
    });
    out
}
