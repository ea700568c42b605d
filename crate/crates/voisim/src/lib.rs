//! Value-of-information (VoI) scheduling and transport simulation for
//! multi-sensor data streams.
//!
//! The crate models a sender that multiplexes readings from many sensors
//! over a capacity-limited connection, one stream per reading. A scheduler
//! decides each sampling period which readings are worth transmitting,
//! trading off intrinsic sensor value, staleness at the receiver, and
//! cross-sensor redundancy. The selection problem is a 0/1 quadratic
//! knapsack, solved exactly for small batches and heuristically otherwise.
//!
//! Modules:
//! - [`core`]: domain types and the VoI model (gain functions, joint value).
//! - [`qkp`]: quadratic knapsack solvers.
//! - [`sched`]: the four scheduler policies.
//! - [`transport`]: discrete-time link, stream lifecycle, capacity estimation.
//! - [`scenarios`]: the autonomous-driving and haptic traffic generators.
//! - [`metrics`]: per-run aggregates (normalized VoI, update frequency, QoE).
//! - [`sim`]: the per-run simulation loop.
//! - [`experiment`]: sweep runner producing deterministic CSV.

pub mod core;
pub mod experiment;
pub mod metrics;
pub mod qkp;
pub mod sched;
pub mod scenarios;
pub mod sim;
pub mod transport;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("gain argument must be non-negative, got {0}")]
    NegativeGainArg(f64),

    #[error("sensor {0} uses a difference-based gain but the object carries no sample value")]
    MissingSampleValue(usize),

    #[error("index {index} out of range for {what} of length {len}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("no sensor spec for sensor id {0}")]
    UnknownSensor(usize),

    #[error("instance has {n} items, exact solver limit is {max}")]
    InstanceTooLarge { n: usize, max: usize },

    #[error("local search seed selection is infeasible")]
    InfeasibleSeed,

    #[error("object {0} is already queued or in flight")]
    DuplicateEnqueue(u64),

    #[error("reference run has zero average value")]
    ZeroReference,

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
