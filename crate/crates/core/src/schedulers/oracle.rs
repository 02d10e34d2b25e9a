//! Exhaustive search over every (station, rate) choice for every chunk of
//! every client. Only usable on tiny instances; the guard rejects anything
//! larger before enumerating.

use std::collections::HashMap;

use crate::engine::run_simulation;
use crate::error::OracleError;
use crate::metrics::run_metrics;
use crate::scenario::{ClientId, ScenarioConfig};
use crate::schedulers::{Decision, Scheduler, SlotContext};

/// Per client (in scenario order), per chunk: `(station index, rate)`.
pub type Assignment = Vec<Vec<(usize, f64)>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleGuard {
    pub max_clients: usize,
    pub max_stations: usize,
    /// Chunks summed over all clients.
    pub max_chunks: u32,
    pub max_rates: usize,
}

impl Default for OracleGuard {
    fn default() -> Self {
        OracleGuard {
            max_clients: 3,
            max_stations: 2,
            max_chunks: 6,
            max_rates: 3,
        }
    }
}

impl OracleGuard {
    pub fn check(&self, cfg: &ScenarioConfig) -> Result<(), OracleError> {
        let chunks: u32 = cfg
            .clients
            .iter()
            .map(|c| c.chunk_count(cfg.chunk_size))
            .sum();
        let checks = [
            ("clients", cfg.clients.len(), self.max_clients),
            ("stations", cfg.stations.len(), self.max_stations),
            ("chunks", chunks as usize, self.max_chunks as usize),
            ("ladder rates", cfg.ladder_kbps.len(), self.max_rates),
        ];
        for (what, got, max) in checks {
            if got > max {
                return Err(OracleError::GuardExceeded(format!(
                    "{got} {what}, at most {max} allowed"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub assignment: Assignment,
    pub utility: f64,
    /// Feasible assignments evaluated.
    pub evaluated: u64,
}

/// Plays back a fixed assignment.
///
/// A choice whose blocks fit is admitted. A choice that does not fit is
/// replaced by the floor-rate fallback; if some station could have admitted
/// the floor, the assignment is marked infeasible.
#[derive(Debug, Clone)]
pub struct Replay {
    name: String,
    assignment: Assignment,
    index: HashMap<ClientId, usize>,
    infeasible: bool,
}

impl Replay {
    pub fn new(name: impl Into<String>, assignment: Assignment) -> Self {
        Replay {
            name: name.into(),
            assignment,
            index: HashMap::new(),
            infeasible: false,
        }
    }

    pub fn assignment(&self) -> &Assignment {
        &self.assignment
    }

    /// Whether the last run hit a choice that did not fit while a feasible one existed.
    pub fn infeasible(&self) -> bool {
        self.infeasible
    }
}

impl Scheduler for Replay {
    fn name(&self) -> &str {
        &self.name
    }

    fn reset(&mut self, cfg: &ScenarioConfig) {
        self.index = cfg
            .clients
            .iter()
            .enumerate()
            .map(|(i, c)| (c.id, i))
            .collect();
        self.infeasible = false;
    }

    fn decide(&mut self, ctx: &SlotContext<'_>) -> Decision {
        let i = self.index[&ctx.client()];
        let (station, rate) = self.assignment[i][(ctx.chunk - 1) as usize];
        let fits = ctx
            .links
            .iter()
            .find(|l| l.station == station)
            .is_some_and(|l| ctx.fits(l, rate));
        if fits {
            return Decision {
                station,
                bitrate_kbps: rate,
                admitted: true,
                fallback: false,
            };
        }
        let fallback = ctx.fallback();
        if fallback.admitted {
            self.infeasible = true;
        }
        fallback
    }
}

/// Finds the assignment with the highest total utility. Ties keep the first
/// assignment in enumeration order (lower station, then lower rate, earlier
/// chunks varying slowest).
pub fn brute_force_schedule(
    cfg: &ScenarioConfig,
    guard: &OracleGuard,
) -> Result<OracleSolution, OracleError> {
    guard.check(cfg)?;
    let k = cfg.stations.len();
    let rates = cfg.ladder().rates().to_vec();
    let options: Vec<(usize, f64)> = (0..k)
        .flat_map(|s| rates.iter().map(move |&r| (s, r)))
        .collect();
    let chunks: Vec<usize> = cfg
        .clients
        .iter()
        .map(|c| c.chunk_count(cfg.chunk_size) as usize)
        .collect();
    let slots: usize = chunks.iter().sum();

    let mut digits = vec![0usize; slots];
    let mut best: Option<OracleSolution> = None;
    let mut evaluated = 0u64;
    let mut last_error = None;
    loop {
        let mut assignment = Vec::with_capacity(chunks.len());
        let mut at = 0;
        for &n in &chunks {
            assignment.push(
                digits[at..at + n]
                    .iter()
                    .map(|&d| options[d])
                    .collect::<Vec<_>>(),
            );
            at += n;
        }
        let mut replay = Replay::new("oracle", assignment);
        match run_simulation(cfg, &mut replay, 0) {
            Ok(_) if replay.infeasible => {}
            Ok(trace) => {
                evaluated += 1;
                if let Ok(m) = run_metrics(cfg, &trace) {
                    if best.as_ref().is_none_or(|b| m.total_utility > b.utility) {
                        best = Some(OracleSolution {
                            assignment: replay.assignment,
                            utility: m.total_utility,
                            evaluated: 0,
                        });
                    }
                }
            }
            Err(e) => last_error = Some(e),
        }

        // Odometer increment, last chunk varying fastest.
        let mut pos = slots;
        loop {
            if pos == 0 {
                return match best {
                    Some(mut b) => {
                        b.evaluated = evaluated;
                        Ok(b)
                    }
                    None => match last_error {
                        Some(e) if evaluated == 0 => Err(OracleError::Engine(e)),
                        _ => Err(OracleError::NoFeasibleAssignment),
                    },
                };
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < options.len() {
                break;
            }
            digits[pos] = 0;
        }
    }
}

/// The oracle as a scheduler: solves up front, then replays the optimum.
#[derive(Debug, Clone)]
pub struct OracleScheduler {
    replay: Replay,
    pub solution: OracleSolution,
}

impl OracleScheduler {
    pub fn solve(cfg: &ScenarioConfig) -> Result<Self, OracleError> {
        Self::solve_with(cfg, &OracleGuard::default())
    }

    pub fn solve_with(cfg: &ScenarioConfig, guard: &OracleGuard) -> Result<Self, OracleError> {
        let solution = brute_force_schedule(cfg, guard)?;
        Ok(OracleScheduler {
            replay: Replay::new("oracle", solution.assignment.clone()),
            solution,
        })
    }
}

impl Scheduler for OracleScheduler {
    fn name(&self) -> &str {
        "oracle"
    }

    fn reset(&mut self, cfg: &ScenarioConfig) {
        self.replay.reset(cfg);
    }

    fn decide(&mut self, ctx: &SlotContext<'_>) -> Decision {
        self.replay.decide(ctx)
    }
}
