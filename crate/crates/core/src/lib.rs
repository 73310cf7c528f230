//! Discrete-event simulator and allocation library for a single wireless
//! cell carrying scalable multicast/broadcast (MBS) video sessions alongside
//! voice, unicast video, and background calls.
//!
//! The cell's bandwidth is split between an MBS share and everything else.
//! The adaptive scheme ([`model::Scheme::Proposed`]) shrinks and regrows the
//! broadcast share one video layer at a time, spreading the loss fairly
//! across sessions by popularity; the fixed baselines reserve a constant
//! broadcast share. [`sim::run`] plays Poisson call traffic against a cell,
//! [`sweep::run_sweep`] compares schemes across offered loads, and
//! [`oracle`] holds small closed-form queueing results the tests calibrate
//! against.

pub mod admission;
pub mod allocation;
pub mod config;
pub mod error;
pub mod metrics;
pub mod model;
pub mod oracle;
pub mod sim;
pub mod sweep;
pub mod traffic;

pub use error::Error;
