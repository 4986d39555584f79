//! Parameter sweeps: evaluate the analytic chain (optionally plus the
//! simulator) over a grid of one scenario parameter and emit a long-form
//! CSV with byte-stable formatting.

use crate::analysis::{analyze, AnalyticReport};
use crate::config::FleetConfig;
use crate::error::{Error, Result};
use crate::sim::{run as run_sim, SimConfig, SimMeasurements};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Sweepable scenario parameters. Geometry parameters apply to every UAV;
/// `rotation_radius` adjusts the velocity at fixed angular velocity so the
/// kinematic identity r = V / omega is preserved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    FUplinkAir,
    FDownlinkAir,
    FDownlinkGround,
    Altitude,
    Aperture,
    Density,
    AngularVelocity,
    RotationRadius,
    Velocity,
    DTx,
    TxPowerDbm,
    MaxAttempts,
    MinContentionWindow,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::FUplinkAir => "f_uplink_air",
            SweepParameter::FDownlinkAir => "f_downlink_air",
            SweepParameter::FDownlinkGround => "f_downlink_ground",
            SweepParameter::Altitude => "altitude",
            SweepParameter::Aperture => "aperture",
            SweepParameter::Density => "density",
            SweepParameter::AngularVelocity => "angular_velocity",
            SweepParameter::RotationRadius => "rotation_radius",
            SweepParameter::Velocity => "velocity",
            SweepParameter::DTx => "d_tx",
            SweepParameter::TxPowerDbm => "tx_power_dbm",
            SweepParameter::MaxAttempts => "max_attempts",
            SweepParameter::MinContentionWindow => "min_contention_window",
        }
    }

    /// Apply one grid value to a scenario.
    pub fn apply(self, fleet: &mut FleetConfig, value: f64) -> Result<()> {
        match self {
            SweepParameter::FUplinkAir => fleet.traffic.f_uplink_air = value,
            SweepParameter::FDownlinkAir => fleet.traffic.f_downlink_air = value,
            SweepParameter::FDownlinkGround => fleet.traffic.f_downlink_ground = value,
            SweepParameter::Altitude => {
                for u in &mut fleet.uavs {
                    u.altitude_m = value;
                }
            }
            SweepParameter::Aperture => {
                for u in &mut fleet.uavs {
                    u.aperture_rad = value;
                }
            }
            SweepParameter::Density => fleet.device_density = value,
            SweepParameter::AngularVelocity => {
                for u in &mut fleet.uavs {
                    u.angular_velocity_radps = value;
                }
            }
            SweepParameter::RotationRadius => {
                for u in &mut fleet.uavs {
                    u.velocity_mps = value * u.angular_velocity_radps;
                }
            }
            SweepParameter::Velocity => {
                for u in &mut fleet.uavs {
                    u.velocity_mps = value;
                }
            }
            SweepParameter::DTx => fleet.d_tx_m = value,
            SweepParameter::TxPowerDbm => fleet.channel.tx_power_dbm = value,
            SweepParameter::MaxAttempts => {
                if value < 1.0 || value.fract() != 0.0 {
                    return Err(Error::config(
                        "sweep.grid",
                        "max_attempts must be an integer >= 1",
                    ));
                }
                fleet.mac.max_attempts = value as u32;
            }
            SweepParameter::MinContentionWindow => {
                if value < 1.0 || value.fract() != 0.0 {
                    return Err(Error::config(
                        "sweep.grid",
                        "min_contention_window must be an integer >= 1",
                    ));
                }
                fleet.mac.min_contention_window = value as u32;
            }
        }
        fleet.validate()
    }
}

/// Simulation options attached to a sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSimOptions {
    pub slots: u64,
    pub seed: u64,
    pub replications: u32,
}

/// Declarative sweep description (TOML file).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub grid: Vec<f64>,
    /// Metric names to record; empty means all.
    #[serde(default)]
    pub metrics: Vec<String>,
    #[serde(default)]
    pub plot: bool,
    #[serde(default)]
    pub simulate: Option<SweepSimOptions>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::config("sweep.grid", "must not be empty"));
        }
        let increasing = self.grid.windows(2).all(|w| w[0] < w[1]);
        let decreasing = self.grid.windows(2).all(|w| w[0] > w[1]);
        if self.grid.len() > 1 && !increasing && !decreasing {
            return Err(Error::config("sweep.grid", "must be strictly monotone"));
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let spec: SweepSpec =
            toml::from_str(text).map_err(|e| Error::config("<sweep>", e.message().to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }
}

/// One long-form output row.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub param: String,
    pub value: f64,
    pub entity: String,
    pub metric: String,
    /// Empty only for failed grid points, which carry a `metric = "error"` row.
    pub analytic: Option<f64>,
    pub sim: Option<f64>,
    pub sim_stderr: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub parameter: SweepParameter,
    pub rows: Vec<SweepRow>,
    /// Grid points that failed, with their error text.
    pub failures: Vec<(f64, String)>,
}

struct PointOutcome {
    value: f64,
    report: Option<(AnalyticReport, Option<SimMeasurements>)>,
    error: Option<String>,
}

fn wants(metrics: &[String], name: &str) -> bool {
    metrics.is_empty() || metrics.iter().any(|m| m == name)
}

/// Evaluate the sweep. Grid points run in parallel (`workers = 0` keeps the
/// global thread pool); rows come out in deterministic grid-then-metric
/// order regardless of scheduling.
pub fn run_sweep(base: &FleetConfig, spec: &SweepSpec, workers: usize) -> Result<SweepResult> {
    spec.validate()?;
    base.validate()?;
    let eval_point = |&value: &f64| -> PointOutcome {
        let mut fleet = base.clone();
        if let Err(e) = spec.parameter.apply(&mut fleet, value) {
            return PointOutcome {
                value,
                report: None,
                error: Some(e.to_string()),
            };
        }
        match analyze(&fleet) {
            Ok(report) => {
                let sim = spec.simulate.as_ref().map(|opts| {
                    let cfg =
                        SimConfig::new(fleet.clone(), opts.slots, opts.seed, opts.replications);
                    run_sim(&cfg)
                });
                match sim {
                    None => PointOutcome {
                        value,
                        report: Some((report, None)),
                        error: None,
                    },
                    Some(Ok(meas)) => PointOutcome {
                        value,
                        report: Some((report, Some(meas))),
                        error: None,
                    },
                    Some(Err(e)) => PointOutcome {
                        value,
                        report: None,
                        error: Some(e.to_string()),
                    },
                }
            }
            Err(e) => PointOutcome {
                value,
                report: None,
                error: Some(e.to_string()),
            },
        }
    };
    let outcomes: Vec<PointOutcome> = if workers == 0 {
        spec.grid.par_iter().map(eval_point).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::numerical("sweep", e.to_string()))?;
        pool.install(|| spec.grid.par_iter().map(eval_point).collect())
    };

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let pname = spec.parameter.name().to_string();
    for out in outcomes {
        let Some((report, sim)) = out.report else {
            let msg = out.error.unwrap_or_else(|| "unknown failure".into());
            rows.push(SweepRow {
                param: pname.clone(),
                value: out.value,
                entity: "-".into(),
                metric: "error".into(),
                analytic: None,
                sim: None,
                sim_stderr: None,
            });
            failures.push((out.value, msg));
            continue;
        };
        let m = report.link.m;
        let gw = report.link.gw;
        let mut push = |entity: String, metric: &str, analytic: f64, sim: Option<(f64, f64)>| {
            rows.push(SweepRow {
                param: pname.clone(),
                value: out.value,
                entity,
                metric: metric.into(),
                analytic: Some(analytic),
                sim: sim.map(|s| s.0),
                sim_stderr: sim.map(|s| s.1),
            });
        };
        if wants(&spec.metrics, "uplink_load") {
            for i in 0..m {
                let s = sim
                    .as_ref()
                    .map(|x| (x.uplink_load[i].mean, x.uplink_load[i].stderr));
                push(
                    format!("uav{}", i + 1),
                    "uplink_load",
                    report.steady.queue_load_up[i],
                    s,
                );
            }
        }
        if wants(&spec.metrics, "downlink_load") {
            for i in 0..m {
                let s = sim
                    .as_ref()
                    .map(|x| (x.downlink_load[i].mean, x.downlink_load[i].stderr));
                push(
                    format!("uav{}", i + 1),
                    "downlink_load",
                    report.steady.queue_load_down[i],
                    s,
                );
            }
        }
        if wants(&spec.metrics, "downlink_load_air") {
            for i in 0..m {
                push(
                    format!("uav{}", i + 1),
                    "downlink_load_air",
                    report.steady.load_down_air[i],
                    None,
                );
            }
        }
        if wants(&spec.metrics, "downlink_load_ground") {
            for i in 0..m {
                push(
                    format!("uav{}", i + 1),
                    "downlink_load_ground",
                    report.steady.load_down_ground[i],
                    None,
                );
            }
        }
        if wants(&spec.metrics, "theta_up") {
            for s_idx in 0..gw {
                let s = sim
                    .as_ref()
                    .map(|x| (x.theta_up[s_idx].mean, x.theta_up[s_idx].stderr));
                push(
                    format!("up{}", s_idx + 1),
                    "theta_up",
                    report.metrics.theta_up[s_idx],
                    s,
                );
            }
        }
        if wants(&spec.metrics, "theta_down") {
            for d in 0..gw {
                // The simulator counts deliveries per cell; the analytic
                // value is per device, so scale by the cell population.
                let share = 1.0 / (report.link.n_devices[d] + 1.0);
                let s = sim
                    .as_ref()
                    .map(|x| (x.theta_down[d].mean * share, x.theta_down[d].stderr * share));
                push(
                    format!("down{}", d + 1),
                    "theta_down",
                    report.metrics.theta_down[d],
                    s,
                );
            }
        }
        if wants(&spec.metrics, "delay_up") {
            for s_idx in 0..gw {
                let s = sim
                    .as_ref()
                    .map(|x| (x.delay_up[s_idx].mean, x.delay_up[s_idx].stderr));
                push(
                    format!("up{}", s_idx + 1),
                    "delay_up",
                    report.metrics.delay_up[s_idx],
                    s,
                );
            }
        }
        if wants(&spec.metrics, "delay_down") {
            for d in 0..gw {
                let s = sim
                    .as_ref()
                    .map(|x| (x.delay_down[d].mean, x.delay_down[d].stderr));
                push(
                    format!("down{}", d + 1),
                    "delay_down",
                    report.metrics.delay_down[d],
                    s,
                );
            }
        }
        if wants(&spec.metrics, "coverage") {
            for i in 0..m {
                push(
                    format!("uav{}", i + 1),
                    "coverage",
                    report.link.p_cov[i],
                    None,
                );
            }
        }
    }
    Ok(SweepResult {
        parameter: spec.parameter,
        rows,
        failures,
    })
}

/// Format one value with 12 significant digits; infinities render as `inf`.
fn fmt_value(v: f64) -> String {
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{v:.11e}")
}

/// Long-form CSV with the fixed column set
/// `param,value,entity,metric,analytic,sim,sim_stderr`, UTF-8, LF endings,
/// byte-stable for identical inputs.
pub fn to_csv(result: &SweepResult) -> String {
    let mut out = String::from("param,value,entity,metric,analytic,sim,sim_stderr\n");
    for r in &result.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.param,
            fmt_value(r.value),
            r.entity,
            r.metric,
            r.analytic.map(fmt_value).unwrap_or_default(),
            r.sim.map(fmt_value).unwrap_or_default(),
            r.sim_stderr.map(fmt_value).unwrap_or_default(),
        ));
    }
    out
}
