//! Rate-based client adaptation: the highest ladder rate not above the mean
//! download rate of the last `m` chunks. Always streams from the nearest
//! station; the first `m` chunks use the floor rate.

use std::collections::HashMap;

use crate::scenario::{BitrateLadder, ClientId, ScenarioConfig};
use crate::schedulers::{Decision, Scheduler, SlotContext};

#[derive(Debug, Default)]
struct Measurements {
    /// Mean effective kbps of each completed chunk.
    chunk_rates: Vec<f64>,
    current_sum: f64,
    current_slots: u32,
}

#[derive(Debug, Default)]
pub struct Rba {
    clients: HashMap<ClientId, Measurements>,
}

impl Rba {
    pub fn new() -> Self {
        Rba::default()
    }

    /// Rate for the next chunk given the per-chunk download rates observed so far.
    pub fn rate_for(measured: &[f64], window: usize, ladder: &BitrateLadder) -> f64 {
        if window == 0 || measured.len() < window {
            return ladder.floor();
        }
        let recent = &measured[measured.len() - window..];
        let avg = recent.iter().sum::<f64>() / window as f64;
        ladder.highest_at_most(avg).unwrap_or(ladder.floor())
    }
}

impl Scheduler for Rba {
    fn name(&self) -> &str {
        "rba"
    }

    fn reset(&mut self, _cfg: &ScenarioConfig) {
        self.clients.clear();
    }

    fn decide(&mut self, ctx: &SlotContext<'_>) -> Decision {
        let m = self.clients.entry(ctx.client()).or_default();
        if m.current_slots > 0 {
            m.chunk_rates
                .push(m.current_sum / f64::from(m.current_slots));
            m.current_sum = 0.0;
            m.current_slots = 0;
        }
        let wanted = Self::rate_for(
            &m.chunk_rates,
            ctx.cfg.rba_window as usize,
            ctx.cfg.ladder(),
        );
        ctx.step_down(ctx.nearest(), wanted)
    }

    fn observe(&mut self, client: ClientId, _slot: u32, effective_kbps: f64) {
        let m = self.clients.entry(client).or_default();
        m.current_sum += effective_kbps;
        m.current_slots += 1;
    }

    fn on_departure(&mut self, _cfg: &ScenarioConfig, session: &crate::engine::ClientSession) {
        self.clients.remove(&session.spec.id);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn moving_average_examples() {
        let l = BitrateLadder::paper_default();
        assert_eq!(Rba::rate_for(&[100.0, 200.0, 300.0], 3, &l), 170.0);
        assert_eq!(Rba::rate_for(&[59.0, 59.0, 59.0], 3, &l), 60.0);
        assert_eq!(Rba::rate_for(&[400.0, 220.0, 250.0], 3, &l), 220.0);
        // Only the last m chunks count.
        assert_eq!(Rba::rate_for(&[1000.0, 100.0, 100.0, 100.0], 3, &l), 90.0);
    }

    #[test]
    fn cold_start_uses_floor() {
        let l = BitrateLadder::paper_default();
        assert_eq!(Rba::rate_for(&[], 3, &l), 60.0);
        assert_eq!(Rba::rate_for(&[500.0, 500.0], 3, &l), 60.0);
    }

    proptest! {
        #[test]
        fn rate_is_below_average_or_floor(measured in prop::collection::vec(0.0f64..500.0, 3..10)) {
            let l = BitrateLadder::paper_default();
            let r = Rba::rate_for(&measured, 3, &l);
            let recent = &measured[measured.len() - 3..];
            let avg = recent.iter().sum::<f64>() / 3.0;
            prop_assert!(l.contains(r));
            prop_assert!(r <= avg || r == l.floor());
        }
    }
}
