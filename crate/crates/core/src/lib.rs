//! Analytical throughput model and slot-level simulator for random-access
//! millimeter-wave networks with a full-duplex, queue-based relay.
//!
//! UEs reach the mmAP either with narrow fully-directional (FD) beams aimed
//! at the relay or at the mmAP, or with wider broadcast (BR) beams heard by
//! both. The relay stores packets it decodes that the mmAP missed and
//! forwards them later, interfering with direct traffic while it does.

pub mod channel;
pub mod closed_form;
pub mod config;
pub mod error;
pub mod experiments;
pub mod numeric;
pub mod queue;
pub mod sim;
pub mod success;
pub mod throughput;

pub use channel::{Channel, LinkKind, LinkState, Scheme};
pub use config::ScenarioConfig;
pub use error::{ModelError, Result};
pub use queue::{NetChangeDistribution, QueueModel, QueueSolution, StabilityThreshold};
pub use sim::{compare, Comparison, Estimate, LosMode, SimOptions, SimStats, Simulator};
pub use success::{InterfererProfile, Reception, SuccessTable};
pub use throughput::{aggregate_throughput, analyze_with, Regime, ThroughputReport};
