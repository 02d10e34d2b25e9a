use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::channel::LinkSample;
use crate::engine::session::{ClientSession, Phase};
use crate::scenario::{ClientId, StationId};

/// State of one active client at the end of one slot. Serialized one per
/// line by [`SimulationTrace::write_jsonl`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotRecord {
    pub slot: u32,
    pub client: ClientId,
    #[serde(skip)]
    pub client_index: usize,
    pub station: StationId,
    #[serde(skip)]
    pub station_index: usize,
    pub chunk: u32,
    pub bitrate_kbps: f64,
    pub theoretical_kbps: f64,
    pub effective_kbps: f64,
    pub buffer_kb: f64,
    pub phase: Phase,
    pub stalled: bool,
    pub admitted: bool,
    pub blocks: u32,
}

impl SlotRecord {
    pub fn link_sample(&self) -> LinkSample {
        LinkSample {
            client: self.client,
            station: self.station,
            slot: self.slot,
            theoretical_kbps: self.theoretical_kbps,
            effective_kbps: self.effective_kbps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StationState {
    pub station: StationId,
    pub slot: u32,
    pub capacity_blocks: u32,
    pub used_blocks: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTrace {
    pub scenario_hash: String,
    pub scheduler: String,
    pub seed: u64,
    /// Ordered by slot, then by client processing order.
    pub records: Vec<SlotRecord>,
    /// `stations[(slot - 1) * K + k]`.
    pub stations: Vec<StationState>,
    pub station_count: usize,
    /// Final sessions in scenario order.
    pub sessions: Vec<ClientSession>,
    /// Total utility as accumulated by the scheduler while it ran, if it tracks one.
    pub scheduler_utility: Option<f64>,
}

impl SimulationTrace {
    pub fn station_state(&self, slot: u32, station: usize) -> &StationState {
        &self.stations[(slot as usize - 1) * self.station_count + station]
    }

    pub fn link_samples(&self) -> impl Iterator<Item = LinkSample> + '_ {
        self.records.iter().map(SlotRecord::link_sample)
    }

    pub fn records_for(&self, client: ClientId) -> impl Iterator<Item = &SlotRecord> + '_ {
        self.records.iter().filter(move |r| r.client == client)
    }

    /// Records grouped by client index (scenario order), in slot order.
    pub fn records_by_client(&self) -> Vec<Vec<&SlotRecord>> {
        let mut out = vec![Vec::new(); self.sessions.len()];
        for rec in &self.records {
            out[rec.client_index].push(rec);
        }
        out
    }

    /// Newline-delimited JSON, one record per client-slot.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> io::Result<()> {
        for rec in &self.records {
            serde_json::to_writer(&mut out, rec)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}
