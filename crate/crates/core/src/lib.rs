//! Slot-level simulation of adaptive video streaming over a multi-station
//! wireless network, with centralized and client-side bitrate schedulers.
//!
//! ```
//! use dashsim_core::{generate_scenario, run_metrics, run_simulation, GenerationParams, Greedy};
//!
//! let params = GenerationParams { clients: 4, servers: 2, horizon: 120, ..GenerationParams::desk() };
//! let params = GenerationParams { arrival_window: (1, 20), session_range: (50, 90), ..params };
//! let cfg = generate_scenario(&params, 1).unwrap();
//! let trace = run_simulation(&cfg, &mut Greedy::new(), 1).unwrap();
//! let metrics = run_metrics(&cfg, &trace).unwrap();
//! assert_eq!(metrics.clients.len(), 4);
//! ```

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod engine;
pub mod error;
pub mod metrics;
pub mod scenario;
pub mod schedulers;

pub use channel::{effective_throughputs, theoretical_throughput, ChannelModel, LinkSample};
pub use engine::{
    blocks_required, check_invariants, run_simulation, run_simulation_with, ClientSession,
    InvariantKind, InvariantViolation, Phase, ScheduleDecision, SimulationTrace, SlotRecord,
    StationState,
};
pub use error::{
    ChannelError, EngineError, MetricsError, OracleError, ScenarioError, SchedulerError,
};
pub use metrics::{client_metrics, run_metrics, ClientMetrics, RunMetrics, SummaryRow};
pub use scenario::{
    generate_scenario, load_scenario, save_scenario, validate_scenario, Area, BitrateLadder,
    ClientId, ClientSpec, GenerationParams, Placement, ScenarioConfig, StationId, StationSpec,
    Violation, WeightConfig,
};
pub use schedulers::{
    brute_force_schedule, scheduler_by_name, Bba, Decision, Greedy, GreedyOptions, LowestRate,
    OracleGuard, OracleScheduler, Rba, Replay, Scheduler, SlotContext, SCHEDULER_NAMES,
};
