//! Scenario fixtures shared by the benchmarks.

use dashsim_core::{generate_scenario, GenerationParams, ScenarioConfig};

/// Desk-scale scenario with `clients` clients on `servers` stations.
pub fn desk(clients: usize, servers: usize, seed: u64) -> ScenarioConfig {
    let params = GenerationParams {
        clients,
        servers,
        ..GenerationParams::desk()
    };
    generate_scenario(&params, seed).expect("desk parameters are valid")
}

/// Smallest instance the exhaustive oracle accepts.
pub fn tiny(seed: u64) -> ScenarioConfig {
    generate_scenario(&GenerationParams::tiny(), seed).expect("tiny parameters are valid")
}
