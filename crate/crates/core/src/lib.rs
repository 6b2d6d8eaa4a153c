//! Deterministic system-level simulator for relay-enhanced cellular networks.
//!
//! The simulator drops indoor terminals over a wrapped hexagonal macro
//! layout with outdoor relay nodes at the sector border, realizes link
//! gains (distance-dependent path loss with LOS probability, NLOS-only
//! log-normal shadowing, sector antenna pattern, penetration loss) and
//! evaluates:
//!
//! * **Relay cell extension** in the downlink: cell selection with a relay
//!   bias `Y` and a macro transmit power reduction `X`
//!   ([`association`], [`dl`]).
//! * **Open-loop fractional power control** in the uplink,
//!   `P = min(P_max, P0 + 10·log10(M) + α·L)` ([`ul`]).
//! * 5th/50th-percentile throughput gains against an eNB-only reference,
//!   bias × power-reduction gain surfaces and power-control tuning
//!   strategies ([`metrics`], [`sweep`], [`pc`]).
//!
//! Every drop is independent and seeded from `(seed, drop_index)`, so all
//! results are identical regardless of worker-thread count.

// Range checks are written as `!(v > lo)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod association;
pub mod config;
pub mod dl;
pub mod drop;
pub mod error;
pub mod exec;
pub mod io;
pub mod metrics;
pub mod pc;
pub mod propagation;
pub mod rng;
pub mod scenario;
pub mod sweep;
pub mod ul;

pub use association::{AssociationMap, OperatingPoint};
pub use config::SimConfig;
pub use drop::DropState;
pub use error::{ConfigError, Error, Result};
pub use exec::Parallelism;
pub use metrics::ThroughputDistribution;
pub use scenario::{
    NetworkLayout, Node, NodeKind, Point, ScenarioConfig, ScenarioKind, UserTerminal,
};
pub use ul::{PowerControlConfig, PowerControlConfigs};

/// Converts a dB value to a linear power ratio.
#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Converts a linear power ratio to dB.
#[inline]
pub fn linear_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}
