//! Task completion probability for UAV-relayed task offloading.
//!
//! A ground user inside a circular request zone uploads a computing task to a
//! hovering UAV relay, which forwards it to one of the computing nodes
//! scattered around the zone as a homogeneous Poisson point process. The task
//! succeeds when upload, forwarding, and computing all fit inside an
//! end-to-end latency budget.
//!
//! The crate evaluates the probability of that event along two independent
//! paths:
//!
//! * an analytical chain ([`analysis`]) that thins the node process by the
//!   latency constraints and applies the Poisson void probability, backed by
//!   adaptive quadrature ([`quad`]) and latency inversion ([`coverage`]);
//! * a Monte Carlo simulator ([`montecarlo`]) that samples node positions,
//!   user positions, and computing latencies directly.
//!
//! [`sweep`] drives both engines over parameter grids (altitude, node
//! density, node distribution radius, latency budget, computing latency) and
//! the `uav-offload` binary exposes everything as `analyze` / `simulate` /
//! `compare` / `sweep` subcommands.

pub mod analysis;
pub mod channel;
pub mod compute;
pub mod config;
pub mod coverage;
pub mod montecarlo;
pub mod quad;
pub mod rng;
pub mod sweep;
pub mod units;

#[cfg(feature = "cli")]
pub mod cli;

pub use analysis::{average_success_probability, success_probability, AverageAnalysis, PointAnalysis};
pub use channel::{AveragingMode, ChannelParams, LinkGeometry};
pub use compute::ComputeLatencyModel;
pub use config::{load_config, ConfigError, RawConfig, ScenarioConfig};
pub use coverage::ServiceRadius;
pub use montecarlo::{estimate_success, Estimate, Simulator, TrialOutcome};
