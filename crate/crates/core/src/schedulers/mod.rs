//! The scheduler contract and its implementations.
//!
//! A scheduler is asked for a decision once per chunk, at the first slot of
//! the chunk. It must return a ladder rate and a station; the decision is
//! either admitted (the station reserves the blocks it needs for every slot
//! of the chunk) or not admitted, in which case the client receives nothing
//! for that chunk.

mod bba;
mod greedy;
mod oracle;
mod rba;

use std::ops::RangeInclusive;

pub use bba::{bba_band, Bba};
pub use greedy::{Greedy, GreedyOptions, GreedyState};
pub use oracle::{
    brute_force_schedule, Assignment, OracleGuard, OracleScheduler, OracleSolution, Replay,
};
pub use rba::Rba;

use crate::channel::effective_share;
use crate::engine::{blocks_required, ClientSession, Link, Phase};
use crate::error::SchedulerError;
use crate::scenario::{ClientId, ScenarioConfig, StationSpec};

/// A client admitted on a station in the current slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peer {
    pub client: ClientId,
    pub theoretical_kbps: f64,
    pub phase: Phase,
    pub buffer_kb: f64,
    pub b_max_kb: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    /// Index into `ScenarioConfig::stations`.
    pub station: usize,
    pub bitrate_kbps: f64,
    /// Blocks fit on `station` for every slot of the chunk.
    pub admitted: bool,
    pub fallback: bool,
}

/// Everything a scheduler may read when deciding one client's next chunk.
pub struct SlotContext<'a> {
    pub cfg: &'a ScenarioConfig,
    pub slot: u32,
    /// 1-based index of the chunk being decided.
    pub chunk: u32,
    pub session: &'a ClientSession,
    /// The client's links, nearest station first.
    pub links: &'a [Link],
    /// Blocks already reserved, `reserved[station][slot]`.
    pub reserved: &'a [Vec<u32>],
    /// Summed theoretical throughput of clients admitted on each station this slot.
    pub station_load_kbps: &'a [f64],
    /// Clients admitted on each station this slot, so far.
    pub peers: &'a [Vec<Peer>],
}

impl<'a> SlotContext<'a> {
    pub fn client(&self) -> ClientId {
        self.session.spec.id
    }

    /// Slots covered by the chunk being decided.
    pub fn window(&self) -> RangeInclusive<u32> {
        self.slot..=self.slot + self.cfg.chunk_size - 1
    }

    pub fn station(&self, index: usize) -> &'a StationSpec {
        &self.cfg.stations[index]
    }

    pub fn nearest(&self) -> &'a Link {
        &self.links[0]
    }

    pub fn remaining(&self, station: usize, slot: u32) -> u32 {
        self.station(station).capacity_at(slot) - self.reserved[station][slot as usize]
    }

    /// Blocks `rate` would need on `link` in each slot of the window,
    /// paired with that slot's capacity.
    pub fn window_blocks(&self, link: &Link, rate: f64) -> impl Iterator<Item = (u32, u32)> + 'a {
        let station = self.station(link.station);
        let thr = link.theoretical_kbps;
        self.window().map(move |t| {
            let cap = station.capacity_at(t);
            (cap, blocks_required(rate, thr, cap))
        })
    }

    /// Whether `rate` fits on `link`'s station for the whole chunk.
    pub fn fits(&self, link: &Link, rate: f64) -> bool {
        let station = self.station(link.station);
        let reserved = &self.reserved[link.station];
        self.window().all(|t| {
            let cap = station.capacity_at(t);
            blocks_required(rate, link.theoretical_kbps, cap) <= cap - reserved[t as usize]
        })
    }

    /// Effective throughput the client would get on `link` this slot if admitted.
    pub fn estimated_effective(&self, link: &Link) -> f64 {
        effective_share(
            link.theoretical_kbps,
            self.station_load_kbps[link.station] + link.theoretical_kbps,
        )
    }

    /// The floor rate on the nearest station that can admit it, or an
    /// unadmitted floor-rate decision on the nearest station.
    pub fn fallback(&self) -> Decision {
        let floor = self.cfg.ladder().floor();
        let admitting = self.links.iter().find(|l| self.fits(l, floor));
        let link = admitting.unwrap_or(self.nearest());
        Decision {
            station: link.station,
            bitrate_kbps: floor,
            admitted: admitting.is_some(),
            fallback: true,
        }
    }

    /// Highest rate not above `wanted` that fits on `link`, stepping down the
    /// ladder; unadmitted floor rate when even the floor does not fit.
    pub fn step_down(&self, link: &Link, wanted: f64) -> Decision {
        let ladder = self.cfg.ladder();
        match ladder
            .rates()
            .iter()
            .rev()
            .copied()
            .find(|&r| r <= wanted && self.fits(link, r))
        {
            Some(rate) => Decision {
                station: link.station,
                bitrate_kbps: rate,
                admitted: true,
                fallback: false,
            },
            None => Decision {
                station: link.station,
                bitrate_kbps: ladder.floor(),
                admitted: false,
                fallback: true,
            },
        }
    }
}

pub trait Scheduler {
    fn name(&self) -> &str;

    /// Called once before the first slot of a run.
    fn reset(&mut self, _cfg: &ScenarioConfig) {}

    fn decide(&mut self, ctx: &SlotContext<'_>) -> Decision;

    /// Effective throughput the client received in `slot`.
    fn observe(&mut self, _client: ClientId, _slot: u32, _effective_kbps: f64) {}

    /// Called at the client's departure slot with its final session.
    fn on_departure(&mut self, _cfg: &ScenarioConfig, _session: &ClientSession) {}

    /// Total utility accumulated online, for schedulers that track it.
    fn online_utility(&self) -> Option<f64> {
        None
    }
}

/// Always the floor rate, on the nearest station that admits it.
#[derive(Debug, Default, Clone, Copy)]
pub struct LowestRate;

impl Scheduler for LowestRate {
    fn name(&self) -> &str {
        "lowest"
    }

    fn decide(&mut self, ctx: &SlotContext<'_>) -> Decision {
        Decision {
            fallback: false,
            ..ctx.fallback()
        }
    }
}

pub const SCHEDULER_NAMES: [&str; 5] = ["greedy", "bba", "rba", "oracle", "lowest"];

/// Builds a scheduler by name. The oracle solves `cfg` exhaustively up front.
pub fn scheduler_by_name(
    name: &str,
    cfg: &ScenarioConfig,
) -> Result<Box<dyn Scheduler>, SchedulerError> {
    match name {
        "greedy" => Ok(Box::new(Greedy::new())),
        "bba" => Ok(Box::new(Bba::new())),
        "rba" => Ok(Box::new(Rba::new())),
        "oracle" => Ok(Box::new(OracleScheduler::solve(cfg)?)),
        "lowest" => Ok(Box::new(LowestRate)),
        other => Err(SchedulerError::UnknownName(other.to_string())),
    }
}
