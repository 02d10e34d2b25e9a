//! Fixed-schema CSV output.
//!
//! `clients.csv` columns: `client, chunks, avg_quality, delay_slots,
//! switching, switch_count, switch_magnitude_kbps, stall_slots, stall_ratio,
//! pf_term, load_sd, utility, avg_bitrate_kbps, mean_effective_kbps`.
//!
//! `summary.csv` has one row: `scenario_hash, scheduler, seed, clients,
//! total_utility, jain_index, rmsd_utilization, mean_effective_kbps,
//! mean_delay_slots, mean_bitrate_kbps, mean_stall_ratio,
//! switching_frequency, switching_magnitude_kbps,
//! switching_magnitude_per_chunk_kbps`.

use std::io::Write;

use serde::Serialize;

use super::{ClientMetrics, RunMetrics};

pub type ClientRow = ClientMetrics;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub scenario_hash: String,
    pub scheduler: String,
    pub seed: u64,
    pub clients: usize,
    pub total_utility: f64,
    pub jain_index: f64,
    pub rmsd_utilization: f64,
    pub mean_effective_kbps: f64,
    pub mean_delay_slots: f64,
    pub mean_bitrate_kbps: f64,
    pub mean_stall_ratio: f64,
    pub switching_frequency: f64,
    pub switching_magnitude_kbps: f64,
    pub switching_magnitude_per_chunk_kbps: f64,
}

impl SummaryRow {
    pub fn new(scenario_hash: &str, scheduler: &str, seed: u64, m: &RunMetrics) -> Self {
        SummaryRow {
            scenario_hash: scenario_hash.to_string(),
            scheduler: scheduler.to_string(),
            seed,
            clients: m.clients.len(),
            total_utility: m.total_utility,
            jain_index: m.jain_index,
            rmsd_utilization: m.rmsd_utilization,
            mean_effective_kbps: m.mean_effective_kbps,
            mean_delay_slots: m.mean_delay_slots,
            mean_bitrate_kbps: m.mean_bitrate_kbps,
            mean_stall_ratio: m.mean_stall_ratio,
            switching_frequency: m.switching_frequency,
            switching_magnitude_kbps: m.switching_magnitude_kbps,
            switching_magnitude_per_chunk_kbps: m.switching_magnitude_per_chunk_kbps,
        }
    }
}

pub fn write_client_csv<W: Write>(out: W, clients: &[ClientMetrics]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for c in clients {
        w.serialize(c)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary_csv<W: Write>(out: W, row: &SummaryRow) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.serialize(row)?;
    w.flush()?;
    Ok(())
}
