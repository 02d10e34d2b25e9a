use serde::{Deserialize, Serialize};

use crate::scenario::ClientSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    /// Filling the buffer up to its target before playback starts.
    Startup,
    Steady,
    Finished,
}

/// One (station, bitrate) assignment covering one chunk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleDecision {
    /// 1-based chunk index.
    pub chunk: u32,
    /// Index into `ScenarioConfig::stations`.
    pub station: usize,
    pub bitrate_kbps: f64,
    pub start_slot: u32,
    /// Whether the station reserved blocks for the chunk. Unadmitted chunks
    /// receive no throughput.
    pub admitted: bool,
    /// The scheduler found no feasible candidate and fell back to the floor rate.
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClientSession {
    pub spec: ClientSpec,
    pub chunk_size: u32,
    pub phase: Phase,
    pub buffer_kb: f64,
    /// Slots from arrival until the buffer first reached its target.
    pub delay_slots: Option<u32>,
    /// Chunk currently being downloaded, 1-based; 0 before the first.
    pub chunk_index: u32,
    pub history: Vec<ScheduleDecision>,
    pub stall_slots: u32,
    pub stalled: bool,
    /// Slots of video played out so far.
    pub played_slots: u32,
}

impl ClientSession {
    pub fn new(spec: ClientSpec, chunk_size: u32) -> Self {
        ClientSession {
            spec,
            chunk_size,
            phase: Phase::Startup,
            buffer_kb: 0.0,
            delay_slots: None,
            chunk_index: 0,
            history: Vec::new(),
            stall_slots: 0,
            stalled: false,
            played_slots: 0,
        }
    }

    pub fn total_chunks(&self) -> u32 {
        self.spec.chunk_count(self.chunk_size)
    }

    pub fn current_decision(&self) -> Option<&ScheduleDecision> {
        self.history.last()
    }

    /// Bitrate of the chunk under the playhead, once playback has started.
    pub fn playing_rate(&self) -> Option<f64> {
        if self.phase != Phase::Steady || self.history.is_empty() {
            return None;
        }
        let idx = (self.played_slots / self.chunk_size) as usize;
        Some(self.history[idx.min(self.history.len() - 1)].bitrate_kbps)
    }

    /// Startup delay as reported by metrics: a session that never reached
    /// its buffer target is charged its whole length.
    pub fn reported_delay(&self) -> u32 {
        self.delay_slots
            .unwrap_or_else(|| self.spec.session_slots())
    }

    pub fn is_chunk_boundary(&self, slot: u32) -> bool {
        self.spec.is_active(slot) && (slot - self.spec.arrival - 1).is_multiple_of(self.chunk_size)
    }
}

/// Advances `session`'s buffer by one slot.
///
/// During startup the buffer only fills; the slot at which it reaches
/// `b_max` ends startup and fixes the delay. Afterwards the chunk under the
/// playhead drains `playing_rate` per slot. A slot whose balance would drop
/// to zero or below empties the buffer, counts as stalled and freezes the
/// playhead until the buffer again holds one slot of the current rate.
pub fn update_buffer(
    session: &mut ClientSession,
    slot: u32,
    effective_kbps: f64,
    playing_rate: Option<f64>,
) {
    let b_max = session.spec.b_max_kb;
    match session.phase {
        Phase::Startup => {
            session.buffer_kb = (session.buffer_kb + effective_kbps).min(b_max);
            if session.buffer_kb >= b_max {
                session.phase = Phase::Steady;
                session.delay_slots = Some(slot - session.spec.arrival);
            }
        }
        Phase::Steady => {
            let rate = playing_rate.unwrap_or(0.0);
            if session.stalled {
                session.buffer_kb = (session.buffer_kb + effective_kbps).min(b_max);
                session.stall_slots += 1;
                if session.buffer_kb >= rate {
                    session.stalled = false;
                }
            } else {
                let next = session.buffer_kb + effective_kbps - rate;
                if next <= 0.0 {
                    session.buffer_kb = 0.0;
                    session.stalled = true;
                    session.stall_slots += 1;
                } else {
                    session.buffer_kb = next.min(b_max);
                    session.played_slots += 1;
                }
            }
        }
        Phase::Finished => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::ClientId;

    fn session(b_max: f64) -> ClientSession {
        ClientSession::new(
            ClientSpec {
                id: ClientId(0),
                group: 0,
                x_m: 0.0,
                y_m: 0.0,
                arrival: 10,
                departure: 60,
                b_max_kb: b_max,
            },
            5,
        )
    }

    #[test]
    fn startup_fills_then_fixes_delay() {
        let mut s = session(3300.0);
        update_buffer(&mut s, 11, 1100.0, None);
        assert_eq!(s.buffer_kb, 1100.0);
        assert_eq!(s.phase, Phase::Startup);
        update_buffer(&mut s, 12, 1100.0, None);
        update_buffer(&mut s, 13, 1100.0, None);
        assert_eq!(s.phase, Phase::Steady);
        assert_eq!(s.delay_slots, Some(3));
        assert_eq!(s.buffer_kb, 3300.0);
    }

    #[test]
    fn startup_caps_at_target() {
        let mut s = session(1000.0);
        update_buffer(&mut s, 11, 1500.0, None);
        assert_eq!(s.buffer_kb, 1000.0);
        assert_eq!(s.delay_slots, Some(1));
    }

    #[test]
    fn balanced_steady_state_keeps_buffer() {
        let mut s = session(3300.0);
        s.phase = Phase::Steady;
        s.buffer_kb = 800.0;
        update_buffer(&mut s, 20, 200.0, Some(200.0));
        assert_eq!(s.buffer_kb, 800.0);
        assert_eq!(s.played_slots, 1);
    }

    #[test]
    fn underrun_stalls_and_freezes_playhead() {
        let mut s = session(3300.0);
        s.phase = Phase::Steady;
        s.buffer_kb = 100.0;
        update_buffer(&mut s, 20, 50.0, Some(220.0));
        assert_eq!(s.buffer_kb, 0.0);
        assert_eq!(s.stall_slots, 1);
        assert!(s.stalled);
        assert_eq!(s.played_slots, 0);

        // Still short of one slot of video: stays stalled.
        update_buffer(&mut s, 21, 150.0, Some(220.0));
        assert!(s.stalled);
        assert_eq!(s.stall_slots, 2);
        assert_eq!(s.buffer_kb, 150.0);

        update_buffer(&mut s, 22, 150.0, Some(220.0));
        assert!(!s.stalled);
        assert_eq!(s.stall_slots, 3);
        assert_eq!(s.played_slots, 0);

        update_buffer(&mut s, 23, 150.0, Some(220.0));
        assert_eq!(s.played_slots, 1);
        assert_eq!(s.buffer_kb, 230.0);
    }

    #[test]
    fn steady_state_clamps_at_target() {
        let mut s = session(500.0);
        s.phase = Phase::Steady;
        s.buffer_kb = 450.0;
        update_buffer(&mut s, 20, 400.0, Some(60.0));
        assert_eq!(s.buffer_kb, 500.0);
    }
}
