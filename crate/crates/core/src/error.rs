//! Crate-wide error type.

use thiserror::Error;

use crate::model::Bandwidth;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Layer count outside the profile's `[min_layers, max_layers]` range.
    #[error("layer count {layers} outside [{min}, {max}]")]
    LayerRange {
        layers: usize,
        min: usize,
        max: usize,
    },

    /// Invalid configuration value; `key` is the offending config key or
    /// parameter name.
    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    /// The broadcast pool cannot fit even with every session at its floor.
    #[error("session floor {floor_kbps} kbps exceeds available {available_kbps} kbps")]
    InfeasibleMbsFloor {
        floor_kbps: Bandwidth,
        available_kbps: Bandwidth,
    },

    /// Unknown call id passed to a state transition.
    #[error("unknown call id {0}")]
    CallNotFound(u64),

    /// The chain has no unique stationary distribution.
    #[error("rate matrix is not irreducible")]
    NotIrreducible,

    /// Enumeration would exceed the supported state-space size.
    #[error("state space too large: {states} states (limit {limit})")]
    StateSpaceTooLarge { states: usize, limit: usize },
}

impl Error {
    pub fn config(key: &str, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.to_string(),
            message: message.into(),
        }
    }
}
