//! Post-hoc constraint checks over a finished trace.

use std::collections::HashMap;
use std::fmt;

use crate::engine::trace::SimulationTrace;
use crate::scenario::ScenarioConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InvariantKind {
    /// Blocks used on a station exceed its per-slot supply.
    Capacity,
    /// An active client-slot without exactly one station assignment.
    OneServerPerSlot,
    /// Station or bitrate changed inside a chunk.
    WholeChunk,
    /// Buffer outside `[0, b_max]`.
    BufferBounds,
    /// A bitrate that is not on the ladder.
    LadderMembership,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantViolation {
    pub kind: InvariantKind,
    pub detail: String,
}

impl fmt::Display for InvariantViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {}", self.kind, self.detail)
    }
}

pub fn check_invariants(cfg: &ScenarioConfig, trace: &SimulationTrace) -> Vec<InvariantViolation> {
    let mut out = Vec::new();
    let mut push = |kind, detail: String| out.push(InvariantViolation { kind, detail });
    let k = cfg.stations.len();
    let c = cfg.chunk_size;

    let mut used = vec![0u64; k * cfg.horizon as usize];
    let mut seen: HashMap<(usize, u32), u32> = HashMap::new();
    let mut chunk_key: HashMap<(usize, u32), (usize, u64)> = HashMap::new();

    for rec in &trace.records {
        let spec = &cfg.clients[rec.client_index];
        *seen.entry((rec.client_index, rec.slot)).or_default() += 1;
        if rec.admitted {
            used[(rec.slot as usize - 1) * k + rec.station_index] += u64::from(rec.blocks);
        }
        if !cfg.ladder().contains(rec.bitrate_kbps) {
            push(
                InvariantKind::LadderMembership,
                format!(
                    "client {} slot {}: {} kbps",
                    rec.client, rec.slot, rec.bitrate_kbps
                ),
            );
        }
        if !(0.0..=spec.b_max_kb).contains(&rec.buffer_kb) {
            push(
                InvariantKind::BufferBounds,
                format!(
                    "client {} slot {}: buffer {}",
                    rec.client, rec.slot, rec.buffer_kb
                ),
            );
        }
        let expected_chunk = (rec.slot - spec.arrival).div_ceil(c);
        if rec.chunk != expected_chunk {
            push(
                InvariantKind::WholeChunk,
                format!(
                    "client {} slot {}: chunk {} expected {}",
                    rec.client, rec.slot, rec.chunk, expected_chunk
                ),
            );
        }
        let key = (rec.station_index, rec.bitrate_kbps.to_bits());
        if let Some(prev) = chunk_key.insert((rec.client_index, rec.chunk), key) {
            if prev != key {
                push(
                    InvariantKind::WholeChunk,
                    format!(
                        "client {} chunk {} changed assignment at slot {}",
                        rec.client, rec.chunk, rec.slot
                    ),
                );
            }
        }
    }

    for state in &trace.stations {
        let s = cfg
            .stations
            .iter()
            .position(|sp| sp.id == state.station)
            .expect("station in scenario");
        let summed = used[(state.slot as usize - 1) * k + s];
        if state.used_blocks > state.capacity_blocks || summed > u64::from(state.capacity_blocks) {
            push(
                InvariantKind::Capacity,
                format!(
                    "station {} slot {}: {} used of {}",
                    state.station, state.slot, summed, state.capacity_blocks
                ),
            );
        }
        if summed != u64::from(state.used_blocks) {
            push(
                InvariantKind::Capacity,
                format!(
                    "station {} slot {}: records sum to {} but station reports {}",
                    state.station, state.slot, summed, state.used_blocks
                ),
            );
        }
    }

    for (i, spec) in cfg.clients.iter().enumerate() {
        for t in 1..=cfg.horizon {
            let n = seen.get(&(i, t)).copied().unwrap_or(0);
            let expected = u32::from(spec.is_active(t));
            if n != expected {
                push(
                    InvariantKind::OneServerPerSlot,
                    format!(
                        "client {} slot {}: {} assignments, expected {}",
                        spec.id, t, n, expected
                    ),
                );
            }
        }
        let session = &trace.sessions[i];
        if session.history.len() as u32 > spec.chunk_count(c) {
            push(
                InvariantKind::WholeChunk,
                format!(
                    "client {}: {} decisions for {} chunks",
                    spec.id,
                    session.history.len(),
                    spec.chunk_count(c)
                ),
            );
        }
    }

    out
}
