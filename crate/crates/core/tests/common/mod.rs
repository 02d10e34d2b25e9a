#![allow(dead_code)]

use dashsim_core::{
    Area, BitrateLadder, ClientId, ClientSpec, ScenarioConfig, StationId, StationSpec, WeightConfig,
};

pub const P_MAX: f64 = 3.6e6;

pub fn station(id: u32, x: f64, y: f64, blocks: u32, horizon: u32) -> StationSpec {
    StationSpec {
        id: StationId(id),
        x_m: x,
        y_m: y,
        p_max_mw: P_MAX,
        blocks: vec![blocks; horizon as usize],
    }
}

pub fn client(id: u32, x: f64, y: f64, arrival: u32, departure: u32) -> ClientSpec {
    ClientSpec {
        id: ClientId(id),
        group: 0,
        x_m: x,
        y_m: y,
        arrival,
        departure,
        b_max_kb: 3300.0,
    }
}

pub fn scenario(
    horizon: u32,
    ladder: &[f64],
    stations: Vec<StationSpec>,
    clients: Vec<ClientSpec>,
) -> ScenarioConfig {
    ScenarioConfig {
        horizon,
        chunk_size: 5,
        area: Area::PAPER,
        alpha: 2.0,
        ladder_kbps: BitrateLadder::new(ladder.to_vec()).unwrap(),
        stations,
        clients,
        weights: WeightConfig::PAPER,
        rba_window: 3,
    }
}

pub const LADDER: [f64; 6] = [60.0, 90.0, 110.0, 130.0, 170.0, 220.0];
