//! Analytic performance prediction for a flying mesh drone network that
//! collects IoT data over a chain of circling UAV relays, validated by a
//! built-in slotted discrete-event simulator.
//!
//! The pipeline layers match the protocol stack: [`topology`] covers the
//! circular-trajectory geometry, [`channel`] the air-to-ground link budget
//! and coverage probability, [`mac`] the DCF attempt/collision fixed point
//! and service-time moments, [`steady_state`] the per-stream rate balance
//! across the relay chain, and [`metrics`] the end-to-end throughput and
//! delay closed forms. [`sim`] provides the independent mechanical oracle,
//! [`compare`] the tolerance gate between the two, and [`sweep`]/[`plot`]
//! the parameter-grid experiment harness.

pub mod analysis;
pub mod channel;
pub mod compare;
pub mod config;
pub mod error;
pub mod link;
pub mod mac;
pub mod metrics;
pub mod plot;
pub mod quad;
pub mod sim;
pub mod steady_state;
pub mod sweep;
pub mod topology;

pub use analysis::{analyze, AnalyticReport};
pub use config::{ChannelParams, FleetConfig, MacParams, TrafficConfig, UavParams};
pub use error::{Error, Result};
pub use link::LinkModel;
pub use metrics::StreamMetrics;
pub use sim::{ArrivalMode, ContactMode, SimConfig, SimMeasurements};
pub use steady_state::SteadyState;
pub use sweep::{run_sweep, SweepParameter, SweepResult, SweepSpec};
