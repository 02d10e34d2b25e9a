//! Link throughput: deterministic path loss and the proportional-fair share
//! a client receives when it shares a base station with others.

use serde::{Deserialize, Serialize};

use crate::error::ChannelError;
use crate::scenario::{ClientId, StationId};

/// Path-loss constants. Throughput is `kappa * p_max / max(d, d_min)^alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    /// kbps per mW·m^-alpha.
    pub kappa: f64,
    /// Near-field guard distance in meters.
    pub min_distance_m: f64,
}

impl Default for ChannelModel {
    fn default() -> Self {
        ChannelModel {
            kappa: 1.0,
            min_distance_m: 1.0,
        }
    }
}

impl ChannelModel {
    pub fn throughput(&self, p_max_mw: f64, distance_m: f64, alpha: f64) -> f64 {
        self.kappa * p_max_mw / distance_m.max(self.min_distance_m).powf(alpha)
    }
}

/// Theoretical link throughput in kbps with the default constants.
pub fn theoretical_throughput(p_max_mw: f64, distance_m: f64, alpha: f64) -> f64 {
    ChannelModel::default().throughput(p_max_mw, distance_m, alpha)
}

/// Splits a station among its assigned clients: each receives
/// `thr_i^2 / sum_j thr_j`.
pub fn effective_throughputs(
    assigned: &[(ClientId, f64)],
) -> Result<Vec<(ClientId, f64)>, ChannelError> {
    if assigned.is_empty() {
        return Err(ChannelError::NoClients);
    }
    if let Some(&(client, kbps)) = assigned.iter().find(|(_, thr)| !(*thr > 0.0)) {
        return Err(ChannelError::NonPositive {
            client: client.0,
            kbps,
        });
    }
    let total: f64 = assigned.iter().map(|(_, thr)| thr).sum();
    Ok(assigned
        .iter()
        .map(|&(id, thr)| (id, effective_share(thr, total)))
        .collect())
}

/// Share of one client given the summed throughput of everyone on the
/// station, itself included.
#[inline]
pub fn effective_share(theoretical_kbps: f64, station_total_kbps: f64) -> f64 {
    theoretical_kbps * theoretical_kbps / station_total_kbps
}

/// One client-slot observation of a link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkSample {
    pub client: ClientId,
    pub station: StationId,
    pub slot: u32,
    pub theoretical_kbps: f64,
    /// Zero when the client's chunk was not admitted by the station.
    pub effective_kbps: f64,
}
