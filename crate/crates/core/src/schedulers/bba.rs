//! Buffer-based client adaptation: the top rate for the first chunk, then a
//! rate picked from the buffer fill ratio. Always streams from the nearest
//! station.

use crate::scenario::BitrateLadder;
use crate::schedulers::{Decision, Scheduler, SlotContext};

/// Fill-ratio thresholds separating the six rate bands.
pub const BBA_THRESHOLDS: [f64; 5] = [2.0 / 6.0, 3.0 / 6.0, 4.0 / 6.0, 4.5 / 6.0, 5.0 / 6.0];

/// Band `0..=5` for a buffer fill ratio.
pub fn bba_band(fill_ratio: f64) -> usize {
    BBA_THRESHOLDS
        .iter()
        .take_while(|&&t| fill_ratio >= t)
        .count()
}

/// Ladder rate for a band; ladders of other lengths are mapped proportionally.
fn band_rate(band: usize, ladder: &BitrateLadder) -> f64 {
    let n = ladder.len();
    let last_band = BBA_THRESHOLDS.len();
    let idx = if n == last_band + 1 {
        band
    } else {
        ((band * (n - 1)) as f64 / last_band as f64).round() as usize
    };
    ladder.rates()[idx]
}

#[derive(Debug, Default)]
pub struct Bba;

impl Bba {
    pub fn new() -> Self {
        Bba
    }

    /// Rate the client asks for before admission control.
    pub fn wanted_rate(ctx: &SlotContext<'_>) -> f64 {
        let ladder = ctx.cfg.ladder();
        if ctx.chunk == 1 {
            return ladder.top();
        }
        let s = ctx.session;
        band_rate(bba_band(s.buffer_kb / s.spec.b_max_kb), ladder)
    }
}

impl Scheduler for Bba {
    fn name(&self) -> &str {
        "bba"
    }

    fn decide(&mut self, ctx: &SlotContext<'_>) -> Decision {
        ctx.step_down(ctx.nearest(), Self::wanted_rate(ctx))
    }
}
