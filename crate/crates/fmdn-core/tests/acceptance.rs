//! Acceptance gate: every release-blocking criterion as one test, each
//! printing a single pass line with its measured margins. Tolerances are
//! pinned here, not configurable.

use fmdn_core::analysis::analyze;
use fmdn_core::channel::{coverage_probability, ClampCounter};
use fmdn_core::compare::{
    compare, DELAY_TOLERANCE_REL, LOAD_TOLERANCE_ABS, THROUGHPUT_TOLERANCE_REL,
};
use fmdn_core::config::FleetConfig;
use fmdn_core::link::LinkModel;
use fmdn_core::mac::{attempt_probability, attempts_per_packet};
use fmdn_core::metrics::e2e_delay_up;
use fmdn_core::sim::{run as run_sim, SimConfig};
use fmdn_core::steady_state::solve_steady_state;
use fmdn_core::sweep::{run_sweep, to_csv, SweepParameter, SweepSimOptions, SweepSpec};
use fmdn_core::topology::contact_probability_radii;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::f64::consts::PI;

fn reference() -> FleetConfig {
    FleetConfig::reference_scenario()
}

/// Parse a sweep CSV into (value -> entity -> metric value) for one metric.
fn csv_series(csv: &str, metric: &str) -> BTreeMap<u64, BTreeMap<String, f64>> {
    let mut out: BTreeMap<u64, BTreeMap<String, f64>> = BTreeMap::new();
    for line in csv.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        if cols[3] != metric {
            continue;
        }
        let value: f64 = cols[1].parse().expect("grid value");
        let analytic: f64 = cols[4].parse().expect("analytic cell");
        out.entry(value.to_bits())
            .or_default()
            .insert(cols[2].to_string(), analytic);
    }
    out
}

#[test]
fn criterion_1_closed_form_spot_checks() {
    // Attempt probability with no collisions reduces to 2/(W+1).
    let mac = reference().mac;
    assert_eq!(attempt_probability(0.0, &mac), 2.0 / 9.0);

    // Truncated-retry attempt counts at exactly representable points.
    let (l, _) = attempts_per_packet(0.5, 3);
    assert_eq!(l, 1.75);
    for k in [1u32, 3, 7] {
        let (l, l2) = attempts_per_packet(0.0, k);
        assert_eq!(l, k as f64);
        assert_eq!(l2, (k * k) as f64);
    }

    // Zero-load per-hop delay with deterministic one-slot service: exactly
    // two slots per hop on every route.
    let mut fleet = reference();
    fleet.device_density = 0.0;
    fleet.traffic.control_prob = 0.0;
    fleet.traffic.f_uplink_air = 1.0;
    fleet.traffic.f_downlink_air = 0.0;
    fleet.mac.max_attempts = 1;
    fleet.mac.min_contention_window = 1;
    fleet.mac.max_backoff_stage = 0;
    let lm = LinkModel::derive(&fleet).unwrap();
    let ss = solve_steady_state(&fleet, &lm).unwrap();
    for s in 0..lm.gw {
        let hops = (lm.m - s) as f64;
        assert_eq!(e2e_delay_up(s, &ss, &lm, &fleet).unwrap(), 2.0 * hops);
    }
    println!("acceptance criterion 1 (closed-form spot checks): PASS");
}

#[test]
fn criterion_2_contact_probability_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_01);
    const SAMPLES: u64 = 1_000_000;
    let mut worst = 0.0f64;
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
            "case {case}: analytic={p} empirical={emp} tol={tol}"
        );
        worst = worst.max((p - emp).abs());
    }
    println!("acceptance criterion 2 (contact probability vs Monte Carlo): PASS (worst abs err {worst:.2e})");
}

#[test]
fn criterion_3_coverage_probability_oracle() {
    // Quadrature against independent Monte-Carlo integration with 1e7
    // samples per altitude, 1e-3 absolute tolerance.
    let c = reference().channel;
    let lambda = reference().device_density;
    let theta = PI / 2.0;
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_03);
    const SAMPLES: u64 = 10_000_000;
    let mut worst = 0.0f64;
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
            let x = 4.0 * PI * c.frequency_hz * d / 299_792_458.0;
            let psi = 10.0 * (pt / (n0 * x * x * snr)).log10();
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
        let err = (quadrature - mc).abs();
        assert!(
            err <= 1e-3,
            "h={h}: quadrature={quadrature} mc={mc} err={err}"
        );
        worst = worst.max(err);
    }
    println!("acceptance criterion 3 (coverage probability vs Monte Carlo): PASS (worst abs err {worst:.2e})");
}

#[test]
fn criterion_4_analytic_vs_simulation() {
    // The validation gate: ten replications of one million slots at the
    // reference scenario. Loads within 0.05 absolute, throughput within 10%
    // relative, delay within 15% relative; every route is stable here.
    let fleet = reference();
    let report = analyze(&fleet).unwrap();
    assert!(
        report.steady.all_stable(),
        "reference scenario must be stable"
    );
    let cfg = SimConfig::new(fleet, 1_000_000, 0xACCE_04, 10);
    let meas = run_sim(&cfg).unwrap();
    assert!(meas.conservation_ok, "DES ledger must balance exactly");
    let cmp = compare(&report, &meas).unwrap();
    let mut worst_load = 0.0f64;
    let mut worst_theta = 0.0f64;
    let mut worst_delay = 0.0f64;
    for row in &cmp.rows {
        assert!(
            row.pass,
            "{} {} analytic={} sim={} abs={} rel={}",
            row.metric, row.entity, row.analytic, row.sim, row.abs_err, row.rel_err
        );
        match row.metric.as_str() {
            "uplink_load" => worst_load = worst_load.max(row.abs_err),
            "theta_up" => worst_theta = worst_theta.max(row.rel_err),
            "delay_up" => worst_delay = worst_delay.max(row.rel_err),
            _ => {}
        }
    }
    // All four streams must have produced delay rows (stable regime).
    assert_eq!(
        cmp.rows.iter().filter(|r| r.metric == "delay_up").count(),
        4
    );
    println!(
        "acceptance criterion 4 (analytic vs DES): PASS (load abs {:.4} <= {}, theta rel {:.4} <= {}, delay rel {:.4} <= {})",
        worst_load, LOAD_TOLERANCE_ABS, worst_theta, THROUGHPUT_TOLERANCE_REL, worst_delay, DELAY_TOLERANCE_REL
    );
}

#[test]
fn criterion_5_parameter_study_shapes() {
    // (a), (b): uplink load vs forwarding probability. The WFQ shares must
    // sum below one, so the full 0.05..0.9 grid pairs with a thin downlink
    // share.
    let mut base = reference();
    base.traffic.f_downlink_air = 0.1;
    let spec = SweepSpec {
        parameter: SweepParameter::FUplinkAir,
        grid: vec![
            0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9,
        ],
        metrics: vec!["uplink_load".into()],
        plot: false,
        simulate: None,
    };
    let csv = to_csv(&run_sweep(&base, &spec, 0).unwrap());
    let series = csv_series(&csv, "uplink_load");
    let mut prev: Option<Vec<f64>> = None;
    for (value_bits, row) in &series {
        let value = f64::from_bits(*value_bits);
        let loads: Vec<f64> = (1..=4).map(|i| row[&format!("uav{i}")]).collect();
        if let Some(p) = &prev {
            for (a, b) in loads.iter().zip(p) {
                assert!(
                    *a <= b + 1e-9,
                    "loads must be non-increasing in f_uplink_air"
                );
            }
        }
        prev = Some(loads.clone());
        let max = loads.iter().cloned().fold(0.0f64, f64::max);
        if value <= 0.15 + 1e-12 {
            assert!(
                max >= 0.99,
                "near-saturation expected at f={value}, max load {max}"
            );
        }
        if value >= 0.4 - 1e-12 {
            assert!(max <= 0.9, "relief expected at f={value}, max load {max}");
        }
        if (value - 0.4).abs() < 1e-12 {
            assert!(
                loads[3] >= loads[2] && loads[2] >= loads[1] && loads[1] >= loads[0],
                "load ordering uav4 >= uav3 >= uav2 >= uav1 at defaults, got {loads:?}"
            );
        }
    }

    // (b) at the shipped defaults as well.
    let report = analyze(&reference()).unwrap();
    let l = &report.steady.queue_load_up;
    assert!(l[3] >= l[2] && l[2] >= l[1] && l[1] >= l[0]);

    // (c): downlink throughput exactly flat in the ground share.
    let spec = SweepSpec {
        parameter: SweepParameter::FDownlinkGround,
        grid: (1..=9).map(|k| 0.1 * k as f64).collect(),
        metrics: vec!["theta_down".into()],
        plot: false,
        simulate: None,
    };
    let csv = to_csv(&run_sweep(&reference(), &spec, 0).unwrap());
    let series = csv_series(&csv, "theta_down");
    for d in 1..=4 {
        let vals: Vec<f64> = series
            .values()
            .map(|row| row[&format!("down{d}")])
            .collect();
        let spread = vals.iter().cloned().fold(f64::MIN, f64::max)
            - vals.iter().cloned().fold(f64::MAX, f64::min);
        assert!(
            spread <= 1e-12,
            "theta_down must be constant, spread {spread}"
        );
    }

    // (d): interior maximizer of uplink throughput in altitude and aperture.
    for (param, grid) in [
        (
            SweepParameter::Altitude,
            vec![5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0, 50.0, 60.0],
        ),
        (
            SweepParameter::Aperture,
            vec![
                PI / 8.0,
                PI / 4.0,
                PI / 3.0,
                PI / 2.0,
                2.0 * PI / 3.0,
                0.8 * PI,
            ],
        ),
    ] {
        let spec = SweepSpec {
            parameter: param,
            grid: grid.clone(),
            metrics: vec!["theta_up".into()],
            plot: false,
            simulate: None,
        };
        let csv = to_csv(&run_sweep(&reference(), &spec, 0).unwrap());
        let series = csv_series(&csv, "theta_up");
        let vals: Vec<f64> = series.values().map(|row| row["up1"]).collect();
        let argmax = vals
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert!(
            argmax > 0 && argmax < vals.len() - 1,
            "{}: maximizer must be interior, argmax {argmax} over {vals:?}",
            param.name()
        );
    }

    // (e): uplink load relieved as angular velocity grows.
    let spec = SweepSpec {
        parameter: SweepParameter::AngularVelocity,
        grid: vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0],
        metrics: vec!["uplink_load".into()],
        plot: false,
        simulate: None,
    };
    let csv = to_csv(&run_sweep(&reference(), &spec, 0).unwrap());
    let series = csv_series(&csv, "uplink_load");
    for i in 1..=4 {
        let vals: Vec<f64> = series.values().map(|row| row[&format!("uav{i}")]).collect();
        for w in vals.windows(2) {
            assert!(w[1] <= w[0] + 1e-9, "uav{i} load must not grow with omega");
        }
        assert!(
            vals.last().unwrap() < vals.first().unwrap(),
            "uav{i} load must strictly drop across the omega grid"
        );
    }

    // (f): downlink service classes stay stable across every family above
    // plus the downlink share sweeps.
    let mut sweeps = vec![
        (
            SweepParameter::FDownlinkAir,
            vec![0.15, 0.2, 0.3, 0.4, 0.5, 0.6],
        ),
        (
            SweepParameter::FDownlinkGround,
            (1..=9).map(|k| 0.1 * k as f64).collect(),
        ),
        (
            SweepParameter::Altitude,
            vec![5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0, 50.0, 60.0],
        ),
        (
            SweepParameter::Aperture,
            vec![
                PI / 8.0,
                PI / 4.0,
                PI / 3.0,
                PI / 2.0,
                2.0 * PI / 3.0,
                0.8 * PI,
            ],
        ),
        (
            SweepParameter::Density,
            vec![1e-4, 2e-4, 4e-4, 8e-4, 1.6e-3],
        ),
        (
            SweepParameter::AngularVelocity,
            vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0],
        ),
    ];
    sweeps.push((
        SweepParameter::FUplinkAir,
        vec![0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7],
    ));
    for (param, grid) in sweeps {
        let spec = SweepSpec {
            parameter: param,
            grid,
            metrics: vec!["downlink_load_air".into(), "downlink_load_ground".into()],
            plot: false,
            simulate: None,
        };
        let result = run_sweep(&reference(), &spec, 0).unwrap();
        assert!(
            result.failures.is_empty(),
            "{} sweep had failures",
            param.name()
        );
        for row in &result.rows {
            let v = row.analytic.unwrap();
            assert!(
                v < 1.0,
                "{} = {v} at {}={} must stay below 1 ({})",
                row.metric,
                row.param,
                row.value,
                row.entity
            );
        }
    }
    println!("acceptance criterion 5 (parameter-study shapes): PASS");
}

#[test]
fn criterion_6_conservation_and_determinism() {
    // Sweep with an attached simulation, twice: byte-identical CSV and exact
    // packet conservation on every grid point.
    let spec = SweepSpec {
        parameter: SweepParameter::FUplinkAir,
        grid: vec![0.3, 0.4, 0.5],
        metrics: vec!["uplink_load".into(), "theta_up".into()],
        plot: false,
        simulate: Some(SweepSimOptions {
            slots: 60_000,
            seed: 99,
            replications: 2,
        }),
    };
    let a = to_csv(&run_sweep(&reference(), &spec, 0).unwrap());
    let b = to_csv(&run_sweep(&reference(), &spec, 2).unwrap());
    assert_eq!(a, b, "identical seeds must give byte-identical CSVs");
    assert!(a.lines().count() > 1);

    let cfg = SimConfig::new(reference(), 80_000, 123, 3);
    let m1 = run_sim(&cfg).unwrap();
    let m2 = run_sim(&cfg).unwrap();
    assert!(m1.conservation_ok);
    assert_eq!(
        serde_json::to_string(&m1).unwrap(),
        serde_json::to_string(&m2).unwrap(),
        "identical seeds must give identical measurements"
    );
    println!("acceptance criterion 6 (conservation and determinism): PASS");
}

#[test]
fn criterion_7_instability_detection_consistency() {
    // A forwarding share this low saturates the relay chain: the solver
    // must clamp, and the simulated backlog must keep growing through the
    // second half of the horizon.
    let mut fleet = reference();
    fleet.traffic.f_uplink_air = 0.05;
    let report = analyze(&fleet).unwrap();
    let clamped: Vec<usize> = (0..report.link.m)
        .filter(|&i| !report.steady.stable_up[i])
        .collect();
    assert!(!clamped.is_empty(), "solver must clamp at least one queue");
    let cfg = SimConfig::new(fleet, 400_000, 0xACCE_07, 3);
    let meas = run_sim(&cfg).unwrap();
    for &i in &clamped {
        let mid = meas.backlog_mid[i];
        let end = meas.backlog_end[i];
        assert!(
            end > mid * 1.4 && end > 200.0,
            "uav{} backlog must grow linearly: mid {mid} end {end}",
            i + 1
        );
    }

    // And the stable reference scenario keeps every queue bounded.
    let stable_fleet = reference();
    let report = analyze(&stable_fleet).unwrap();
    assert!(report.steady.queue_load_up.iter().all(|&l| l <= 0.9));
    let cfg = SimConfig::new(stable_fleet, 400_000, 0xACCE_08, 3);
    let meas = run_sim(&cfg).unwrap();
    for i in 0..meas.backlog_end.len() {
        assert!(
            meas.backlog_end[i] <= 50.0,
            "uav{} backlog {} must stay bounded in the stable regime",
            i + 1,
            meas.backlog_end[i]
        );
    }
    println!("acceptance criterion 7 (instability detection consistency): PASS");
}
