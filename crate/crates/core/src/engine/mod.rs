//! The discrete-time slot loop.
//!
//! Each slot runs in three passes over the active clients, in ascending
//! (arrival, id) order: incumbents mid-chunk are counted on their stations,
//! clients at a chunk boundary ask the scheduler for a decision, then every
//! client receives its proportional-fair share and its buffer advances.

mod invariants;
mod session;
mod trace;

pub use invariants::{check_invariants, InvariantKind, InvariantViolation};
pub use session::{update_buffer, ClientSession, Phase, ScheduleDecision};
pub use trace::{SimulationTrace, SlotRecord, StationState};

use crate::channel::{effective_share, ChannelModel};
use crate::error::EngineError;
use crate::scenario::{validate_scenario, ScenarioConfig};
use crate::schedulers::{Peer, Scheduler, SlotContext};

/// Resource blocks a client streaming `bitrate` over a link of
/// `theoretical_kbps` occupies out of `capacity_blocks`:
/// `ceil(bitrate / theoretical * capacity)`.
pub fn blocks_required(bitrate_kbps: f64, theoretical_kbps: f64, capacity_blocks: u32) -> u32 {
    let exact = bitrate_kbps * f64::from(capacity_blocks) / theoretical_kbps;
    let nearest = exact.round();
    // Products like 110 * 300 / 330 land a hair above an integer.
    let blocks = if (exact - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest
    } else {
        exact.ceil()
    };
    if blocks >= f64::from(u32::MAX) {
        u32::MAX
    } else {
        blocks as u32
    }
}

/// A client's link to one station.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub station: usize,
    pub distance_m: f64,
    pub theoretical_kbps: f64,
}

/// Links from a client at `(x, y)` to every station, nearest first.
pub fn client_links(cfg: &ScenarioConfig, channel: &ChannelModel, x: f64, y: f64) -> Vec<Link> {
    let mut links: Vec<Link> = cfg
        .stations
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let d = (s.x_m - x).hypot(s.y_m - y);
            Link {
                station: i,
                distance_m: d,
                theoretical_kbps: channel.throughput(s.p_max_mw, d, cfg.alpha),
            }
        })
        .collect();
    links.sort_by(|a, b| {
        a.distance_m
            .total_cmp(&b.distance_m)
            .then(a.station.cmp(&b.station))
    });
    links
}

fn peer(session: &ClientSession, theoretical_kbps: f64) -> Peer {
    Peer {
        client: session.spec.id,
        theoretical_kbps,
        phase: session.phase,
        buffer_kb: session.buffer_kb,
        b_max_kb: session.spec.b_max_kb,
    }
}

pub fn run_simulation(
    cfg: &ScenarioConfig,
    scheduler: &mut dyn Scheduler,
    seed: u64,
) -> Result<SimulationTrace, EngineError> {
    run_simulation_with(cfg, &ChannelModel::default(), scheduler, seed)
}

/// Runs `cfg` to its horizon under `scheduler`.
///
/// No randomness is consumed by the engine itself; `seed` is recorded in the
/// trace so results stay attributable to the run that produced them.
pub fn run_simulation_with(
    cfg: &ScenarioConfig,
    channel: &ChannelModel,
    scheduler: &mut dyn Scheduler,
    seed: u64,
) -> Result<SimulationTrace, EngineError> {
    if let Some(v) = validate_scenario(cfg).into_iter().next() {
        return Err(EngineError::InvalidScenario(v.to_string()));
    }
    let k = cfg.stations.len();
    let c = cfg.chunk_size;
    let horizon = cfg.horizon as usize;
    let name = scheduler.name().to_string();
    scheduler.reset(cfg);

    let links: Vec<Vec<Link>> = cfg
        .clients
        .iter()
        .map(|cl| client_links(cfg, channel, cl.x_m, cl.y_m))
        .collect();
    // thr[client][station]
    let thr: Vec<Vec<f64>> = links
        .iter()
        .map(|ls| {
            let mut row = vec![0.0; k];
            for l in ls {
                row[l.station] = l.theoretical_kbps;
            }
            row
        })
        .collect();

    let mut order: Vec<usize> = (0..cfg.clients.len()).collect();
    order.sort_by_key(|&i| (cfg.clients[i].arrival, cfg.clients[i].id));

    let mut sessions: Vec<ClientSession> = cfg
        .clients
        .iter()
        .map(|cl| ClientSession::new(cl.clone(), c))
        .collect();
    let mut reserved = vec![vec![0u32; horizon + 1]; k];
    let mut load = vec![0.0f64; k];
    let mut peers: Vec<Vec<Peer>> = vec![Vec::new(); k];
    let mut records = Vec::new();
    let mut stations = Vec::with_capacity(horizon * k);

    // Clients sorted by arrival leave a moving window of candidates.
    let mut first_pending = 0usize;

    for t in 1..=cfg.horizon {
        while first_pending < order.len() && cfg.clients[order[first_pending]].departure < t {
            // Departure is not monotone in arrival order; this only trims a prefix.
            first_pending += 1;
        }
        let active: Vec<usize> = order[first_pending..]
            .iter()
            .copied()
            .take_while(|&i| cfg.clients[i].arrival < t)
            .filter(|&i| cfg.clients[i].is_active(t))
            .collect();

        load.iter_mut().for_each(|x| *x = 0.0);
        peers.iter_mut().for_each(Vec::clear);
        for &i in &active {
            if sessions[i].is_chunk_boundary(t) {
                continue;
            }
            let d = sessions[i]
                .current_decision()
                .expect("mid-chunk client has a decision");
            if d.admitted {
                load[d.station] += thr[i][d.station];
                peers[d.station].push(peer(&sessions[i], thr[i][d.station]));
            }
        }

        for &i in &active {
            if !sessions[i].is_chunk_boundary(t) {
                continue;
            }
            sessions[i].chunk_index += 1;
            let decision = {
                let ctx = SlotContext {
                    cfg,
                    slot: t,
                    chunk: sessions[i].chunk_index,
                    session: &sessions[i],
                    links: &links[i],
                    reserved: &reserved,
                    station_load_kbps: &load,
                    peers: &peers,
                };
                scheduler.decide(&ctx)
            };
            let client = cfg.clients[i].id.0;
            if decision.station >= k {
                return Err(EngineError::UnknownStation {
                    scheduler: name,
                    client,
                    station: decision.station,
                    stations: k,
                });
            }
            if !cfg.ladder().contains(decision.bitrate_kbps) {
                return Err(EngineError::NotInLadder {
                    scheduler: name,
                    client,
                    bitrate_kbps: decision.bitrate_kbps,
                });
            }
            let s = decision.station;
            if decision.admitted {
                let spec = &cfg.stations[s];
                for slot in t..t + c {
                    let cap = spec.capacity_at(slot);
                    let needed = blocks_required(decision.bitrate_kbps, thr[i][s], cap);
                    let remaining = cap - reserved[s][slot as usize];
                    if needed > remaining {
                        return Err(EngineError::CapacityViolation {
                            scheduler: name,
                            client,
                            station: spec.id.0,
                            slot,
                            needed,
                            remaining,
                        });
                    }
                }
                for slot in t..t + c {
                    let cap = spec.capacity_at(slot);
                    reserved[s][slot as usize] +=
                        blocks_required(decision.bitrate_kbps, thr[i][s], cap);
                }
                load[s] += thr[i][s];
                peers[s].push(peer(&sessions[i], thr[i][s]));
            }
            let chunk = sessions[i].chunk_index;
            sessions[i].history.push(ScheduleDecision {
                chunk,
                station: s,
                bitrate_kbps: decision.bitrate_kbps,
                start_slot: t,
                admitted: decision.admitted,
                fallback: decision.fallback,
            });
        }

        for &i in &active {
            let d = *sessions[i].current_decision().expect("decided");
            let s = d.station;
            let cap = cfg.stations[s].capacity_at(t);
            let (effective, blocks) = if d.admitted {
                (
                    effective_share(thr[i][s], load[s]),
                    blocks_required(d.bitrate_kbps, thr[i][s], cap),
                )
            } else {
                (0.0, 0)
            };
            let playing = sessions[i].playing_rate();
            update_buffer(&mut sessions[i], t, effective, playing);
            records.push(SlotRecord {
                slot: t,
                client: cfg.clients[i].id,
                client_index: i,
                station: cfg.stations[s].id,
                station_index: s,
                chunk: d.chunk,
                bitrate_kbps: d.bitrate_kbps,
                theoretical_kbps: thr[i][s],
                effective_kbps: effective,
                buffer_kb: sessions[i].buffer_kb,
                phase: sessions[i].phase,
                stalled: sessions[i].stalled,
                admitted: d.admitted,
                blocks,
            });
            scheduler.observe(cfg.clients[i].id, t, effective);
            if t == cfg.clients[i].departure {
                sessions[i].phase = Phase::Finished;
                scheduler.on_departure(cfg, &sessions[i]);
            }
        }

        for (s, spec) in cfg.stations.iter().enumerate() {
            stations.push(StationState {
                station: spec.id,
                slot: t,
                capacity_blocks: spec.capacity_at(t),
                used_blocks: reserved[s][t as usize],
            });
        }
    }

    Ok(SimulationTrace {
        scenario_hash: cfg.hash(),
        scheduler: name,
        seed,
        records,
        stations,
        station_count: k,
        sessions,
        scheduler_utility: scheduler.online_utility(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blocks_for_floor_rate_at_hundred_meters() {
        assert_eq!(blocks_required(60.0, 360.0, 200), 34);
    }

    #[test]
    fn full_occupancy_when_rate_equals_link() {
        for (thr, cap) in [(360.0, 200), (330.0, 300), (110.0, 137), (97.3, 101)] {
            assert_eq!(blocks_required(thr, thr, cap), cap);
        }
        assert_eq!(blocks_required(110.0, 330.0, 300), 100);
    }

    #[test]
    fn over_capacity_when_rate_exceeds_link() {
        let b = blocks_required(220.0, 110.0, 100);
        assert_eq!(b, 200);
        assert!(b > 100);
    }
}
