use std::path::PathBuf;

use thiserror::Error;

use crate::scenario::Violation;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("generation parameter `{field}`: {reason}")]
    InvalidParams { field: &'static str, reason: String },

    #[error("failed to read scenario {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to parse scenario: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("scenario has {} invariant violation(s); first: {}", .0.len(), .0[0])]
    Invalid(Vec<Violation>),
}

/// Failures of the scheduler contract detected by the slot engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("scheduler `{scheduler}` chose {bitrate_kbps} kbps for client {client}, which is not on the ladder")]
    NotInLadder {
        scheduler: String,
        client: u32,
        bitrate_kbps: f64,
    },

    #[error("scheduler `{scheduler}` chose station index {station} for client {client}, but only {stations} exist")]
    UnknownStation {
        scheduler: String,
        client: u32,
        station: usize,
        stations: usize,
    },

    #[error(
        "scheduler `{scheduler}` admitted client {client} on station {station} at slot {slot}: \
         needs {needed} blocks, {remaining} remain"
    )]
    CapacityViolation {
        scheduler: String,
        client: u32,
        station: u32,
        slot: u32,
        needed: u32,
        remaining: u32,
    },

    #[error("scenario is invalid: {0}")]
    InvalidScenario(String),
}

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("instance exceeds the exhaustive-search guard: {0}")]
    GuardExceeded(String),

    #[error("no feasible assignment exists")]
    NoFeasibleAssignment,

    #[error(transparent)]
    Engine(#[from] EngineError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("bitrate {rate} kbps is below the ladder floor {floor} kbps")]
    BelowFloor { rate: f64, floor: f64 },

    #[error("{0} requires at least one chunk")]
    EmptyHistory(&'static str),

    #[error("accumulated bitrate is zero")]
    ZeroBitrate,

    #[error("jain index is undefined when every input is zero or the input is empty")]
    AllZero,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("effective throughput needs at least one assigned client")]
    NoClients,

    #[error("theoretical throughput of client {client} must be positive, got {kbps}")]
    NonPositive { client: u32, kbps: f64 },
}

#[derive(Debug, Error)]
pub enum SchedulerError {
    #[error("unknown scheduler `{0}` (expected greedy, bba, rba, oracle or lowest)")]
    UnknownName(String),

    #[error(transparent)]
    Oracle(#[from] OracleError),
}
