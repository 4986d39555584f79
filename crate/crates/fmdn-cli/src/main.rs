//! `fmdn` command-line driver: analytic reports, simulation runs, parameter
//! sweeps and analytic-vs-simulation comparisons over scenario files.
//!
//! Exit codes: 0 success, 1 comparison-tolerance failure, 2 configuration
//! error, 3 numerical error, 4 usage error, 5 i/o error.

use clap::{Args, Parser, Subcommand};
use fmdn_core::analysis::{analyze, render_text};
use fmdn_core::compare::{compare, render_text as render_compare};
use fmdn_core::config::FleetConfig;
use fmdn_core::error::Error;
use fmdn_core::plot::{metrics_present, render_metric_svg};
use fmdn_core::sim::{run as run_sim, ArrivalMode, ContactMode, SimConfig};
use fmdn_core::sweep::{run_sweep, to_csv, SweepSpec};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "fmdn",
    about = "Cross-layer performance analysis for flying mesh drone networks",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SimArgs {
    /// Slot horizon per replication.
    #[arg(long, default_value_t = 1_000_000)]
    slots: u64,
    /// Warmup slots excluded from statistics (default: slots / 5).
    #[arg(long)]
    warmup: Option<u64>,
    /// Base random seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Independent replications.
    #[arg(long, default_value_t = 1)]
    reps: u32,
    /// Uplink arrival realization.
    #[arg(long, value_parser = parse_arrival, default_value = "injected")]
    arrival_mode: ArrivalMode,
    /// Inter-UAV contact realization.
    #[arg(long, value_parser = parse_contact, default_value = "geometric")]
    contact_mode: ContactMode,
}

impl SimArgs {
    fn build(&self, fleet: FleetConfig) -> SimConfig {
        let mut cfg = SimConfig::new(fleet, self.slots, self.seed, self.reps);
        if let Some(w) = self.warmup {
            cfg.warmup = w;
        }
        cfg.arrival_mode = self.arrival_mode;
        cfg.contact_mode = self.contact_mode;
        cfg
    }
}

fn parse_arrival(s: &str) -> Result<ArrivalMode, String> {
    match s {
        "injected" => Ok(ArrivalMode::Injected),
        "poisson-sampled-coverage" => Ok(ArrivalMode::PoissonSampledCoverage),
        other => Err(format!("unknown arrival mode `{other}`")),
    }
}

fn parse_contact(s: &str) -> Result<ContactMode, String> {
    match s {
        "geometric" => Ok(ContactMode::Geometric),
        "bernoulli-xi" => Ok(ContactMode::BernoulliXi),
        other => Err(format!("unknown contact mode `{other}`")),
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve the analytic model and print the full report.
    Analyze {
        /// Scenario file (TOML).
        #[arg(long)]
        config: PathBuf,
        /// Also write the report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Slot duration in seconds for the delay column (default: the
        /// scenario's idle-slot duration).
        #[arg(long)]
        slot_duration: Option<f64>,
    },
    /// Run the slotted simulator and write its measurements.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        sim: SimArgs,
        /// Output JSON path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a parameter sweep and emit the long-form CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Sweep description file (TOML).
        #[arg(long)]
        sweep: PathBuf,
        /// Worker threads for grid points (0 = default pool).
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// CSV output path (stdout when omitted). Plot files land next to it.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Emit SVG line charts per metric.
        #[arg(long)]
        plot: bool,
    },
    /// Run analytic and simulation sides and compare them per metric.
    Compare {
        /// Scenario file; required unless both cached artifacts are given.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Cached `analyze --out` JSON.
        #[arg(long)]
        analytic: Option<PathBuf>,
        /// Cached `simulate --out` JSON.
        #[arg(long, id = "sim-file")]
        sim_file: Option<PathBuf>,
        #[command(flatten)]
        sim: SimArgs,
        /// Write the comparison report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the bundled reference scenario to a file.
    InitConfig {
        #[arg(long, default_value = "scenario.toml")]
        out: PathBuf,
    },
}

fn write_or_print(path: &Option<PathBuf>, content: &str) -> Result<(), Error> {
    match path {
        Some(p) => {
            std::fs::write(p, content)?;
            Ok(())
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn run_command(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Analyze { config, out, slot_duration } => {
            let fleet = FleetConfig::from_path(&config)?;
            let report = analyze(&fleet)?;
            if let Some(p) = &out {
                let json = serde_json::to_string_pretty(&report)
                    .map_err(|e| Error::numerical("serialize", e.to_string()))?;
                std::fs::write(p, json)?;
            }
            print!("{}", render_text(&report, &fleet, slot_duration));
            Ok(ExitCode::SUCCESS)
        }
        Command::Simulate { config, sim, out } => {
            let fleet = FleetConfig::from_path(&config)?;
            let cfg = sim.build(fleet);
            let meas = run_sim(&cfg)?;
            let json = serde_json::to_string_pretty(&meas)
                .map_err(|e| Error::numerical("serialize", e.to_string()))?;
            write_or_print(&out, &(json + "\n"))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep {
            config,
            sweep,
            workers,
            out,
            plot,
        } => {
            let fleet = FleetConfig::from_path(&config)?;
            let spec = SweepSpec::from_path(&sweep)?;
            let result = run_sweep(&fleet, &spec, workers)?;
            let csv = to_csv(&result);
            write_or_print(&out, &csv)?;
            for (value, message) in &result.failures {
                eprintln!("warning: grid point {value} failed: {message}");
            }
            if plot || spec.plot {
                let dir = out
                    .as_deref()
                    .and_then(Path::parent)
                    .map(Path::to_path_buf)
                    .unwrap_or_else(|| PathBuf::from("."));
                for metric in metrics_present(&result) {
                    if let Some(svg) = render_metric_svg(&result, &metric) {
                        let file =
                            dir.join(format!("sweep_{}_{}.svg", result.parameter.name(), metric));
                        std::fs::write(&file, svg)?;
                        eprintln!("wrote {}", file.display());
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Compare {
            config,
            analytic,
            sim_file,
            sim,
            out,
        } => {
            let (report, meas) = match (&analytic, &sim_file) {
                (Some(a), Some(s)) => {
                    let report: fmdn_core::AnalyticReport =
                        serde_json::from_str(&std::fs::read_to_string(a)?)
                            .map_err(|e| Error::Usage(format!("bad analytic artifact: {e}")))?;
                    let meas: fmdn_core::SimMeasurements =
                        serde_json::from_str(&std::fs::read_to_string(s)?)
                            .map_err(|e| Error::Usage(format!("bad sim artifact: {e}")))?;
                    (report, meas)
                }
                (None, None) => {
                    let cfg_path = config.ok_or_else(|| {
                        Error::Usage(
                            "compare needs --config or both --analytic and --sim-file".into(),
                        )
                    })?;
                    let fleet = FleetConfig::from_path(&cfg_path)?;
                    let report = analyze(&fleet)?;
                    let meas = run_sim(&sim.build(fleet))?;
                    (report, meas)
                }
                _ => {
                    return Err(Error::Usage(
                        "provide both --analytic and --sim-file, or neither".into(),
                    ))
                }
            };
            let cmp = compare(&report, &meas)?;
            if let Some(p) = &out {
                let json = serde_json::to_string_pretty(&cmp)
                    .map_err(|e| Error::numerical("serialize", e.to_string()))?;
                std::fs::write(p, json)?;
            }
            print!("{}", render_compare(&cmp));
            Ok(if cmp.all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::InitConfig { out } => {
            std::fs::write(&out, FleetConfig::reference_scenario().to_toml_string())?;
            eprintln!("wrote {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run_command(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
