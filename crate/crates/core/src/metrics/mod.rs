//! QoE, fairness and load-balancing metrics computed from a finished trace.

mod export;

pub use export::{write_client_csv, write_summary_csv, ClientRow, SummaryRow};

use serde::Serialize;

use crate::engine::{ScheduleDecision, SimulationTrace};
use crate::error::MetricsError;
use crate::scenario::{BitrateLadder, ClientId, ScenarioConfig, WeightConfig};

/// Log quality mapping normalised so the ladder floor scores zero.
pub fn quality_of_rate(rate_kbps: f64, ladder: &BitrateLadder) -> Result<f64, MetricsError> {
    let floor = ladder.floor();
    if rate_kbps < floor {
        return Err(MetricsError::BelowFloor {
            rate: rate_kbps,
            floor,
        });
    }
    Ok((rate_kbps / floor).ln())
}

pub fn rates(history: &[ScheduleDecision]) -> Vec<f64> {
    history.iter().map(|d| d.bitrate_kbps).collect()
}

/// Mean quality over the downloaded chunks.
pub fn average_quality(rates: &[f64], ladder: &BitrateLadder) -> Result<f64, MetricsError> {
    if rates.is_empty() {
        return Err(MetricsError::EmptyHistory("average quality"));
    }
    let mut sum = 0.0;
    for &r in rates {
        sum += quality_of_rate(r, ladder)?;
    }
    Ok(sum / rates.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Switching {
    /// Sum of absolute quality differences between consecutive chunks.
    pub accumulated: f64,
    /// Chunks whose quality differs from the previous chunk.
    pub count: u32,
    /// Sum of absolute bitrate differences over those switches, kbps.
    pub magnitude_sum_kbps: f64,
}

impl Switching {
    /// Mean bitrate jump per switch, kbps; zero without switches.
    pub fn mean_magnitude_kbps(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.magnitude_sum_kbps / f64::from(self.count)
        }
    }
}

pub fn switching(rates: &[f64], ladder: &BitrateLadder) -> Result<Switching, MetricsError> {
    if rates.is_empty() {
        return Err(MetricsError::EmptyHistory("switching"));
    }
    let mut out = Switching::default();
    let mut prev_q = quality_of_rate(rates[0], ladder)?;
    for pair in rates.windows(2) {
        let q = quality_of_rate(pair[1], ladder)?;
        if q != prev_q {
            out.count += 1;
            out.magnitude_sum_kbps += (pair[1] - pair[0]).abs();
        }
        out.accumulated += (q - prev_q).abs();
        prev_q = q;
    }
    Ok(out)
}

/// Natural log of the bitrate accumulated over every slot of the session;
/// each chunk contributes `chunk_size * rate`.
pub fn pf_term(rates: &[f64], chunk_size: u32) -> Result<f64, MetricsError> {
    let total: f64 = rates.iter().map(|r| f64::from(chunk_size) * r).sum();
    if !(total > 0.0) {
        return Err(MetricsError::ZeroBitrate);
    }
    Ok(total.ln())
}

/// Population standard deviation.
pub fn population_sd(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt()
}

/// Share of station `station`'s blocks the client occupied, summed over the
/// slots it was served there.
pub fn utilization(trace: &SimulationTrace, client_index: usize, station: usize) -> f64 {
    trace
        .records
        .iter()
        .filter(|r| r.client_index == client_index && r.station_index == station && r.admitted)
        .map(|r| {
            f64::from(r.blocks) / f64::from(trace.station_state(r.slot, station).capacity_blocks)
        })
        .sum()
}

pub fn utility(cm: &ClientMetrics, w: &WeightConfig) -> f64 {
    w.beta * (w.rho * cm.avg_quality - w.omega * f64::from(cm.delay_slots) - w.gamma * cm.switching)
        + w.theta * cm.pf_term
        - w.mu * cm.load_sd
}

/// Jain's fairness index `(sum x)^2 / (n * sum x^2)`.
pub fn jain_index(values: &[f64]) -> Result<f64, MetricsError> {
    let sum: f64 = values.iter().sum();
    let sq: f64 = values.iter().map(|v| v * v).sum();
    if values.is_empty() || !(sq > 0.0) {
        return Err(MetricsError::AllZero);
    }
    Ok(sum * sum / (values.len() as f64 * sq))
}

/// Per-station mean utilization fraction over the horizon.
pub fn station_utilization(trace: &SimulationTrace) -> Vec<f64> {
    let k = trace.station_count;
    let mut u = vec![0.0; k];
    for (i, st) in trace.stations.iter().enumerate() {
        u[i % k] += f64::from(st.used_blocks) / f64::from(st.capacity_blocks);
    }
    let slots = (trace.stations.len() / k.max(1)) as f64;
    u.iter_mut().for_each(|x| *x /= slots);
    u
}

/// Root-mean-square deviation of per-station utilization about its mean.
pub fn rmsd_utilization(trace: &SimulationTrace) -> f64 {
    population_sd(&station_utilization(trace))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClientMetrics {
    pub client: ClientId,
    pub chunks: u32,
    pub avg_quality: f64,
    pub delay_slots: u32,
    pub switching: f64,
    pub switch_count: u32,
    pub switch_magnitude_kbps: f64,
    pub stall_slots: u32,
    pub stall_ratio: f64,
    pub pf_term: f64,
    pub load_sd: f64,
    pub utility: f64,
    pub avg_bitrate_kbps: f64,
    pub mean_effective_kbps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetrics {
    pub clients: Vec<ClientMetrics>,
    pub total_utility: f64,
    pub jain_index: f64,
    pub rmsd_utilization: f64,
    /// Mean effective throughput over all active client-slots.
    pub mean_effective_kbps: f64,
    pub mean_delay_slots: f64,
    pub mean_bitrate_kbps: f64,
    pub mean_stall_ratio: f64,
    /// Switches per downloaded chunk.
    pub switching_frequency: f64,
    /// Mean bitrate jump per switch, kbps.
    pub switching_magnitude_kbps: f64,
    /// Summed bitrate jumps per downloaded chunk, kbps.
    pub switching_magnitude_per_chunk_kbps: f64,
}

pub fn client_metrics(
    cfg: &ScenarioConfig,
    trace: &SimulationTrace,
) -> Result<Vec<ClientMetrics>, MetricsError> {
    let k = cfg.stations.len();
    let by_client = trace.records_by_client();
    trace
        .sessions
        .iter()
        .zip(by_client)
        .map(|(session, recs)| {
            let rates = rates(&session.history);
            let sw = switching(&rates, cfg.ladder())?;
            let mut u = vec![0.0; k];
            let mut eff_sum = 0.0;
            for r in &recs {
                eff_sum += r.effective_kbps;
                if r.admitted {
                    u[r.station_index] += f64::from(r.blocks)
                        / f64::from(trace.station_state(r.slot, r.station_index).capacity_blocks);
                }
            }
            let slots = session.spec.session_slots();
            let mut cm = ClientMetrics {
                client: session.spec.id,
                chunks: rates.len() as u32,
                avg_quality: average_quality(&rates, cfg.ladder())?,
                delay_slots: session.reported_delay(),
                switching: sw.accumulated,
                switch_count: sw.count,
                switch_magnitude_kbps: sw.mean_magnitude_kbps(),
                stall_slots: session.stall_slots,
                stall_ratio: f64::from(session.stall_slots) / f64::from(slots),
                pf_term: pf_term(&rates, cfg.chunk_size)?,
                load_sd: population_sd(&u),
                utility: 0.0,
                avg_bitrate_kbps: rates.iter().sum::<f64>() / rates.len() as f64,
                mean_effective_kbps: if recs.is_empty() {
                    0.0
                } else {
                    eff_sum / recs.len() as f64
                },
            };
            cm.utility = utility(&cm, &cfg.weights);
            Ok(cm)
        })
        .collect()
}

pub fn run_metrics(
    cfg: &ScenarioConfig,
    trace: &SimulationTrace,
) -> Result<RunMetrics, MetricsError> {
    let clients = client_metrics(cfg, trace)?;
    let n = clients.len().max(1) as f64;
    let chunks: u32 = clients.iter().map(|c| c.chunks).sum();
    let switches: u32 = clients.iter().map(|c| c.switch_count).sum();
    let magnitude: f64 = clients
        .iter()
        .map(|c| c.switch_magnitude_kbps * f64::from(c.switch_count))
        .sum();
    let avg_rates: Vec<f64> = clients.iter().map(|c| c.avg_bitrate_kbps).collect();
    let eff_total: f64 = trace.records.iter().map(|r| r.effective_kbps).sum();

    Ok(RunMetrics {
        total_utility: clients.iter().map(|c| c.utility).sum(),
        jain_index: jain_index(&avg_rates)?,
        rmsd_utilization: rmsd_utilization(trace),
        mean_effective_kbps: eff_total / trace.records.len().max(1) as f64,
        mean_delay_slots: clients
            .iter()
            .map(|c| f64::from(c.delay_slots))
            .sum::<f64>()
            / n,
        mean_bitrate_kbps: avg_rates.iter().sum::<f64>() / n,
        mean_stall_ratio: clients.iter().map(|c| c.stall_ratio).sum::<f64>() / n,
        switching_frequency: f64::from(switches) / f64::from(chunks.max(1)),
        switching_magnitude_kbps: if switches == 0 {
            0.0
        } else {
            magnitude / f64::from(switches)
        },
        switching_magnitude_per_chunk_kbps: magnitude / f64::from(chunks.max(1)),
        clients,
    })
}
