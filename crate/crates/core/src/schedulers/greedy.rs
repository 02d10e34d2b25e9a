//! Centralized per-chunk greedy scheduler.
//!
//! At each chunk boundary the client's candidate stations are scanned
//! nearest first and every ladder rate is tried. A candidate is feasible when
//! the station can reserve its blocks for the whole chunk and, once playback
//! has started, the buffer can absorb it. Feasible candidates are scored with
//! the client's objective evaluated over the chunks decided so far plus the
//! candidate; the best score wins, ties going to the nearer station and then
//! the lower rate.

use std::collections::HashMap;

use crate::engine::{ClientSession, Link, Phase};
use crate::metrics::{self, quality_of_rate, ClientMetrics};
use crate::scenario::{ClientId, ScenarioConfig};
use crate::schedulers::{Decision, Scheduler, SlotContext};

/// Objective terms accumulated over a client's decided chunks.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GreedyState {
    pub quality_sum: f64,
    pub last_quality: Option<f64>,
    pub switching: f64,
    /// Bitrate summed over every slot decided so far.
    pub rate_slots: f64,
    /// Blocks-over-capacity summed per station.
    pub usage: Vec<f64>,
}

impl GreedyState {
    fn new(stations: usize) -> Self {
        GreedyState {
            usage: vec![0.0; stations],
            ..Default::default()
        }
    }
}

/// Switches for the parts of the objective that reach beyond the deciding client.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GreedyOptions {
    /// Charge the extra startup delay a candidate station imposes on clients
    /// already buffering there.
    pub peer_delay: bool,
    /// During startup only consider rates the station can sustain, i.e. not
    /// above the estimated effective throughput.
    pub sustainable_startup: bool,
}

impl Default for GreedyOptions {
    fn default() -> Self {
        GreedyOptions {
            peer_delay: true,
            sustainable_startup: true,
        }
    }
}

#[derive(Debug, Default)]
pub struct Greedy {
    options: GreedyOptions,
    states: HashMap<ClientId, GreedyState>,
    total_utility: f64,
}

impl Greedy {
    pub fn new() -> Self {
        Greedy::default()
    }

    pub fn with_options(options: GreedyOptions) -> Self {
        Greedy {
            options,
            ..Greedy::default()
        }
    }

    pub fn state(&self, client: ClientId) -> Option<&GreedyState> {
        self.states.get(&client)
    }
}

struct Candidate {
    utility: f64,
    decision: Decision,
    quality: f64,
    usage: f64,
}

/// Population SD of `usage` after adding `extra` to entry `k`, from running sums.
fn sd_after(sum: f64, sum_sq: f64, n: f64, current: f64, extra: f64) -> f64 {
    let next = current + extra;
    let s = sum + extra;
    let sq = sum_sq - current * current + next * next;
    let mean = s / n;
    (sq / n - mean * mean).max(0.0).sqrt()
}

/// Slots a startup client needs to fill `missing` Kb at `share` kbps.
fn fill_slots(missing: f64, share: f64) -> f64 {
    if missing <= 0.0 {
        0.0
    } else {
        (missing / share).ceil()
    }
}

/// Extra startup slots the clients buffering on `link`'s station would need
/// if the deciding client joined it.
fn peer_delay(ctx: &SlotContext<'_>, link: &Link) -> f64 {
    let load = ctx.station_load_kbps[link.station];
    ctx.peers[link.station]
        .iter()
        .filter(|p| p.phase == Phase::Startup)
        .map(|p| {
            let missing = p.b_max_kb - p.buffer_kb;
            let sq = p.theoretical_kbps * p.theoretical_kbps;
            fill_slots(missing, sq / (load + link.theoretical_kbps))
                - fill_slots(missing, sq / load)
        })
        .sum()
}

fn steady_feasible(session: &ClientSession, chunk_size: u32, effective: f64, rate: f64) -> bool {
    let b = session.buffer_kb;
    let after_slot = b - rate;
    let after_chunk = b + f64::from(chunk_size) * (effective - rate);
    after_slot > 0.0 && after_slot <= session.spec.b_max_kb && after_chunk > 0.0
}

impl Greedy {
    fn evaluate(&self, ctx: &SlotContext<'_>, state: &GreedyState) -> Option<Candidate> {
        let cfg = ctx.cfg;
        let w = cfg.weights;
        let c = f64::from(cfg.chunk_size);
        let session = ctx.session;
        let chunks = f64::from(session.total_chunks());
        let n = state.usage.len() as f64;
        let usage_sum: f64 = state.usage.iter().sum();
        let usage_sq: f64 = state.usage.iter().map(|u| u * u).sum();
        let startup = session.phase == Phase::Startup;
        let elapsed = f64::from(ctx.slot - 1 - session.spec.arrival);
        let missing = session.spec.b_max_kb - session.buffer_kb;

        let mut best: Option<Candidate> = None;
        for link in ctx.links {
            let effective = ctx.estimated_effective(link);
            let mut delay = if startup {
                elapsed + fill_slots(missing, effective)
            } else {
                f64::from(session.reported_delay())
            };
            if self.options.peer_delay {
                delay += peer_delay(ctx, link);
            }
            for &rate in cfg.ladder().rates() {
                // Block demand grows with the rate.
                if !ctx.fits(link, rate) {
                    break;
                }
                let buffer_ok = if startup {
                    session.buffer_kb < session.spec.b_max_kb
                        && (!self.options.sustainable_startup || rate <= effective)
                } else {
                    steady_feasible(session, cfg.chunk_size, effective, rate)
                };
                if !buffer_ok {
                    continue;
                }
                let q = quality_of_rate(rate, cfg.ladder()).expect("ladder rate");
                let aq = (state.quality_sum + q) / chunks;
                let e = state.switching + state.last_quality.map_or(0.0, |lq| (q - lq).abs());
                let pf = (state.rate_slots + c * rate).ln();
                let du = window_usage(ctx, link, rate);
                let sd = sd_after(usage_sum, usage_sq, n, state.usage[link.station], du);
                let utility = w.beta * (w.rho * aq - w.omega * delay - w.gamma * e) + w.theta * pf
                    - w.mu * sd;
                let better = match &best {
                    None => true,
                    Some(b) => utility > b.utility + 1e-12 * b.utility.abs(),
                };
                if better {
                    best = Some(Candidate {
                        utility,
                        decision: Decision {
                            station: link.station,
                            bitrate_kbps: rate,
                            admitted: true,
                            fallback: false,
                        },
                        quality: q,
                        usage: du,
                    });
                }
            }
        }
        best
    }
}

fn window_usage(ctx: &SlotContext<'_>, link: &Link, rate: f64) -> f64 {
    ctx.window_blocks(link, rate)
        .map(|(cap, blocks)| f64::from(blocks) / f64::from(cap))
        .sum()
}

impl Scheduler for Greedy {
    fn name(&self) -> &str {
        "greedy"
    }

    fn reset(&mut self, _cfg: &ScenarioConfig) {
        self.states.clear();
        self.total_utility = 0.0;
    }

    fn decide(&mut self, ctx: &SlotContext<'_>) -> Decision {
        let k = ctx.cfg.stations.len();
        let client = ctx.client();
        let state = self
            .states
            .remove(&client)
            .unwrap_or_else(|| GreedyState::new(k));
        let chosen = self.evaluate(ctx, &state).unwrap_or_else(|| {
            let decision = ctx.fallback();
            let link = ctx
                .links
                .iter()
                .find(|l| l.station == decision.station)
                .expect("fallback station is linked");
            Candidate {
                utility: f64::NEG_INFINITY,
                decision,
                quality: 0.0,
                usage: if decision.admitted {
                    window_usage(ctx, link, decision.bitrate_kbps)
                } else {
                    0.0
                },
            }
        });

        let mut state = state;
        let d = chosen.decision;
        state.switching += state
            .last_quality
            .map_or(0.0, |lq| (chosen.quality - lq).abs());
        state.last_quality = Some(chosen.quality);
        state.quality_sum += chosen.quality;
        state.rate_slots += f64::from(ctx.cfg.chunk_size) * d.bitrate_kbps;
        state.usage[d.station] += chosen.usage;
        self.states.insert(client, state);
        d
    }

    fn on_departure(&mut self, cfg: &ScenarioConfig, session: &ClientSession) {
        let Some(state) = self.states.remove(&session.spec.id) else {
            return;
        };
        let chunks = session.history.len().max(1) as f64;
        let cm = ClientMetrics {
            client: session.spec.id,
            chunks: session.history.len() as u32,
            avg_quality: state.quality_sum / chunks,
            delay_slots: session.reported_delay(),
            switching: state.switching,
            switch_count: 0,
            switch_magnitude_kbps: 0.0,
            stall_slots: session.stall_slots,
            stall_ratio: 0.0,
            pf_term: state.rate_slots.ln(),
            load_sd: metrics::population_sd(&state.usage),
            utility: 0.0,
            avg_bitrate_kbps: 0.0,
            mean_effective_kbps: 0.0,
        };
        self.total_utility += metrics::utility(&cm, &cfg.weights);
    }

    fn online_utility(&self) -> Option<f64> {
        Some(self.total_utility)
    }
}
