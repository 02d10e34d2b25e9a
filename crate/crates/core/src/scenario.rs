//! Experiment scenarios: the bitrate ladder, base stations, the client
//! population and the objective weights, plus seeded generation, validation
//! and the JSON file format.
//!
//! Slots are numbered `1..=horizon` and last one second each. A client with
//! arrival `A` and departure `D` downloads during slots `A+1..=D`, which is
//! `(D - A) / chunk_size` whole chunks.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::ScenarioError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClientId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StationId(pub u32);

impl fmt::Display for ClientId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl fmt::Display for StationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Discrete set of encodings offered for every chunk, in kbps, strictly
/// ascending. The same ladder is replicated on every edge server.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BitrateLadder(Vec<f64>);

impl BitrateLadder {
    /// Builds a ladder, rejecting empty, non-positive or non-ascending input.
    pub fn new(rates: Vec<f64>) -> Result<Self, String> {
        let ladder = BitrateLadder(rates);
        match ladder.problems().into_iter().next() {
            Some(problem) => Err(problem),
            None => Ok(ladder),
        }
    }

    pub fn paper_default() -> Self {
        BitrateLadder(vec![60.0, 90.0, 110.0, 130.0, 170.0, 220.0])
    }

    pub fn rates(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn floor(&self) -> f64 {
        self.0[0]
    }

    pub fn top(&self) -> f64 {
        self.0[self.0.len() - 1]
    }

    pub fn contains(&self, rate: f64) -> bool {
        self.0.contains(&rate)
    }

    /// Highest rate not exceeding `limit`, if any.
    pub fn highest_at_most(&self, limit: f64) -> Option<f64> {
        self.0.iter().rev().copied().find(|&r| r <= limit)
    }

    fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.0.is_empty() {
            out.push("ladder must not be empty".to_string());
        }
        if self.0.iter().any(|r| !r.is_finite() || *r <= 0.0) {
            out.push("every rate must be finite and positive".to_string());
        }
        if self.0.windows(2).any(|w| w[0] >= w[1]) {
            out.push("rates must be strictly ascending".to_string());
        }
        out
    }
}

/// Objective weights: `beta`, `theta`, `mu` balance QoE, proportional
/// fairness and load balancing; `rho`, `omega`, `gamma` balance quality,
/// startup delay and switching inside the QoE term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightConfig {
    pub beta: f64,
    pub theta: f64,
    pub mu: f64,
    pub rho: f64,
    pub omega: f64,
    pub gamma: f64,
}

impl WeightConfig {
    pub const PAPER: WeightConfig = WeightConfig {
        beta: 0.7,
        theta: 0.25,
        mu: 0.05,
        rho: 0.7,
        omega: 0.05,
        gamma: 0.25,
    };

    fn named(&self) -> [(&'static str, f64); 6] {
        [
            ("beta", self.beta),
            ("theta", self.theta),
            ("mu", self.mu),
            ("rho", self.rho),
            ("omega", self.omega),
            ("gamma", self.gamma),
        ]
    }
}

impl Default for WeightConfig {
    fn default() -> Self {
        WeightConfig::PAPER
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Area {
    pub width_m: f64,
    pub height_m: f64,
}

impl Area {
    pub const PAPER: Area = Area {
        width_m: 400.0,
        height_m: 1000.0,
    };

    pub fn contains(&self, x: f64, y: f64) -> bool {
        (0.0..=self.width_m).contains(&x) && (0.0..=self.height_m).contains(&y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StationSpec {
    pub id: StationId,
    pub x_m: f64,
    pub y_m: f64,
    pub p_max_mw: f64,
    /// Resource blocks available in each slot; `blocks[t - 1]` is slot `t`.
    pub blocks: Vec<u32>,
}

impl StationSpec {
    pub fn capacity_at(&self, slot: u32) -> u32 {
        self.blocks[(slot - 1) as usize]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClientSpec {
    pub id: ClientId,
    pub group: u32,
    pub x_m: f64,
    pub y_m: f64,
    pub arrival: u32,
    pub departure: u32,
    pub b_max_kb: f64,
}

impl ClientSpec {
    pub fn session_slots(&self) -> u32 {
        self.departure - self.arrival
    }

    pub fn chunk_count(&self, chunk_size: u32) -> u32 {
        self.session_slots() / chunk_size
    }

    /// True when the client downloads during `slot`.
    pub fn is_active(&self, slot: u32) -> bool {
        self.arrival < slot && slot <= self.departure
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub horizon: u32,
    pub chunk_size: u32,
    pub area: Area,
    pub alpha: f64,
    pub ladder_kbps: BitrateLadder,
    pub stations: Vec<StationSpec>,
    pub clients: Vec<ClientSpec>,
    pub weights: WeightConfig,
    pub rba_window: u32,
}

impl ScenarioConfig {
    pub fn ladder(&self) -> &BitrateLadder {
        &self.ladder_kbps
    }

    pub fn total_chunks(&self) -> u64 {
        self.clients
            .iter()
            .map(|c| u64::from(c.chunk_count(self.chunk_size)))
            .sum()
    }

    /// Canonical pretty-printed JSON, terminated by a newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("scenario serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let cfg: ScenarioConfig = serde_json::from_str(text)?;
        let violations = validate_scenario(&cfg);
        if violations.is_empty() {
            Ok(cfg)
        } else {
            Err(ScenarioError::Invalid(violations))
        }
    }

    /// Short content hash of the canonical serialization; identical
    /// scenarios share a hash regardless of how they were produced.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("scenario serializes");
        let digest = Sha256::digest(&bytes);
        hex::encode(&digest[..8])
    }
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<ScenarioConfig, ScenarioError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    ScenarioConfig::from_json(&text)
}

pub fn save_scenario(cfg: &ScenarioConfig, path: impl AsRef<Path>) -> Result<(), ScenarioError> {
    let path = path.as_ref();
    fs::write(path, cfg.to_json()).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// One broken invariant, located by a field path such as `clients[3].b_max_kb`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl Violation {
    fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Violation {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ValidationOptions {
    /// Also require `rho + omega + gamma == 1`.
    pub strict_weights: bool,
}

pub fn validate_scenario(cfg: &ScenarioConfig) -> Vec<Violation> {
    validate_scenario_with(cfg, ValidationOptions::default())
}

pub fn validate_scenario_with(cfg: &ScenarioConfig, opts: ValidationOptions) -> Vec<Violation> {
    let mut out = Vec::new();

    if cfg.chunk_size < 1 {
        out.push(Violation::new("chunk_size", "must be at least 1"));
    }
    if cfg.horizon < cfg.chunk_size.max(1) {
        out.push(Violation::new("horizon", "must be at least chunk_size"));
    }
    if !(cfg.area.width_m > 0.0 && cfg.area.height_m > 0.0) {
        out.push(Violation::new("area", "width and height must be positive"));
    }
    if !(2.0..=5.0).contains(&cfg.alpha) {
        out.push(Violation::new(
            "alpha",
            format!("path_loss_alpha must lie in [2, 5], got {}", cfg.alpha),
        ));
    }
    for problem in cfg.ladder_kbps.problems() {
        out.push(Violation::new("ladder_kbps", problem));
    }
    if cfg.rba_window < 1 {
        out.push(Violation::new("rba_window", "must be at least 1"));
    }

    for (name, value) in cfg.weights.named() {
        if !(0.0..=1.0).contains(&value) {
            out.push(Violation::new(
                format!("weights.{name}"),
                format!("must lie in [0, 1], got {value}"),
            ));
        }
    }
    if opts.strict_weights {
        let w = cfg.weights;
        let sum = w.rho + w.omega + w.gamma;
        if (sum - 1.0).abs() > 1e-9 {
            out.push(Violation::new(
                "weights",
                format!("rho + omega + gamma must equal 1, got {sum}"),
            ));
        }
    }

    if cfg.stations.is_empty() {
        out.push(Violation::new(
            "stations",
            "at least one station is required",
        ));
    }
    let mut station_ids = HashSet::new();
    for (i, s) in cfg.stations.iter().enumerate() {
        let at = |field: &str| format!("stations[{i}].{field}");
        if !station_ids.insert(s.id) {
            out.push(Violation::new(
                at("id"),
                format!("duplicate station id {}", s.id),
            ));
        }
        if !cfg.area.contains(s.x_m, s.y_m) {
            out.push(Violation::new(at("x_m"), "position lies outside the area"));
        }
        if !(s.p_max_mw > 0.0 && s.p_max_mw.is_finite()) {
            out.push(Violation::new(at("p_max_mw"), "must be positive"));
        }
        if s.blocks.len() != cfg.horizon as usize {
            out.push(Violation::new(
                at("blocks"),
                format!("expected {} entries, got {}", cfg.horizon, s.blocks.len()),
            ));
        }
        if let Some(t) = s.blocks.iter().position(|&b| b < 1) {
            out.push(Violation::new(
                format!("stations[{i}].blocks[{t}]"),
                "must be at least 1",
            ));
        }
    }

    let mut client_ids = HashSet::new();
    for (i, c) in cfg.clients.iter().enumerate() {
        let at = |field: &str| format!("clients[{i}].{field}");
        if !client_ids.insert(c.id) {
            out.push(Violation::new(
                at("id"),
                format!("duplicate client id {}", c.id),
            ));
        }
        if !cfg.area.contains(c.x_m, c.y_m) {
            out.push(Violation::new(at("x_m"), "position lies outside the area"));
        }
        if c.arrival >= c.departure {
            out.push(Violation::new(at("departure"), "must be after arrival"));
        } else if cfg.chunk_size > 0 && c.session_slots() % cfg.chunk_size != 0 {
            out.push(Violation::new(
                at("departure"),
                "session length must be a whole number of chunks",
            ));
        }
        if c.departure > cfg.horizon {
            out.push(Violation::new(
                at("departure"),
                "must not exceed the horizon",
            ));
        }
        if !(c.b_max_kb > 0.0 && c.b_max_kb.is_finite()) {
            out.push(Violation::new(at("b_max_kb"), "must be positive"));
        }
    }

    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Placement {
    /// Uniform over the whole area.
    Uniform,
    /// `far_fraction` of clients in the outer 10% band of the area, the rest
    /// within `near_radius_m` of a random station.
    FarNear {
        far_fraction: f64,
        near_radius_m: f64,
    },
}

impl Placement {
    pub const FAR_NEAR: Placement = Placement::FarNear {
        far_fraction: 0.3,
        near_radius_m: 100.0,
    };
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationParams {
    pub clients: usize,
    pub servers: usize,
    pub horizon: u32,
    pub chunk_size: u32,
    pub area: Area,
    pub alpha: f64,
    pub p_max_mw: f64,
    pub ladder: BitrateLadder,
    pub weights: WeightConfig,
    pub b_max_kb: f64,
    /// Inclusive range of arrival slots.
    pub arrival_window: (u32, u32),
    /// Inclusive range of session lengths in slots, before truncation to whole chunks.
    pub session_range: (u32, u32),
    /// Inclusive range of per-slot resource blocks.
    pub blocks_range: (u32, u32),
    pub placement: Placement,
    pub rba_window: u32,
}

/// Three chunks of the top ladder rate: 220 kbps x 5 s x 3.
pub const DEFAULT_B_MAX_KB: f64 = 3300.0;

impl GenerationParams {
    /// The full evaluation setup: 100 clients over 12 servers for an hour.
    pub fn paper() -> Self {
        GenerationParams {
            clients: 100,
            servers: 12,
            horizon: 3600,
            chunk_size: 5,
            area: Area::PAPER,
            alpha: 2.0,
            p_max_mw: 3.6e6,
            ladder: BitrateLadder::paper_default(),
            weights: WeightConfig::PAPER,
            b_max_kb: DEFAULT_B_MAX_KB,
            arrival_window: (1, 1200),
            session_range: (1000, 2000),
            blocks_range: (100, 200),
            placement: Placement::Uniform,
            rba_window: 3,
        }
    }

    /// A quarter-length variant of [`GenerationParams::paper`] with four
    /// stations, small enough for tests.
    pub fn desk() -> Self {
        GenerationParams {
            clients: 20,
            servers: 4,
            horizon: 900,
            arrival_window: (1, 300),
            session_range: (250, 500),
            ..GenerationParams::paper()
        }
    }

    /// Instances small enough for exhaustive search: up to 3 clients of one
    /// or two chunks over 2 stations and a 3-rate ladder.
    pub fn tiny() -> Self {
        GenerationParams {
            clients: 3,
            servers: 2,
            horizon: 30,
            ladder: BitrateLadder::new(vec![60.0, 110.0, 220.0]).expect("valid ladder"),
            arrival_window: (0, 10),
            session_range: (5, 10),
            ..GenerationParams::paper()
        }
    }

    fn check(&self) -> Result<(), ScenarioError> {
        let bad = |field: &'static str, reason: &str| {
            Err(ScenarioError::InvalidParams {
                field,
                reason: reason.to_string(),
            })
        };
        if self.clients == 0 {
            return bad("clients", "must be at least 1");
        }
        if self.servers == 0 {
            return bad("servers", "must be at least 1");
        }
        if self.chunk_size == 0 {
            return bad("chunk_size", "must be at least 1");
        }
        if self.horizon < self.chunk_size {
            return bad("horizon", "must hold at least one chunk");
        }
        let (lo, hi) = self.session_range;
        if lo > hi {
            return bad("session_range", "lower bound exceeds upper bound");
        }
        let longest = (hi / self.chunk_size).max(1) * self.chunk_size;
        if longest > self.horizon {
            return bad("horizon", "shorter than the longest possible session");
        }
        if self.arrival_window.0 > self.arrival_window.1 {
            return bad("arrival_window", "lower bound exceeds upper bound");
        }
        let (blo, bhi) = self.blocks_range;
        if blo < 1 || blo > bhi {
            return bad(
                "blocks_range",
                "must be a non-empty range of positive counts",
            );
        }
        if let Placement::FarNear { far_fraction, .. } = self.placement {
            if !(0.0..=1.0).contains(&far_fraction) {
                return bad("placement", "far fraction must lie in [0, 1]");
            }
        }
        Ok(())
    }
}

/// Rows and columns of the station grid: the factorisation of `k` whose
/// cell shape best matches the area's aspect ratio.
fn grid_shape(k: usize, area: Area) -> (usize, usize) {
    let target = (area.width_m / area.height_m).ln();
    (1..=k)
        .filter(|rows| k.is_multiple_of(*rows))
        .map(|rows| (rows, k / rows))
        .min_by(|a, b| {
            let score = |(rows, cols): (usize, usize)| (cols as f64 / rows as f64).ln() - target;
            score(*a).abs().total_cmp(&score(*b).abs())
        })
        .expect("k >= 1")
}

fn station_positions(k: usize, area: Area) -> Vec<(f64, f64)> {
    let (rows, cols) = grid_shape(k, area);
    let dx = area.width_m / cols as f64;
    let dy = area.height_m / rows as f64;
    (0..rows)
        .flat_map(|r| (0..cols).map(move |c| ((c as f64 + 0.5) * dx, (r as f64 + 0.5) * dy)))
        .collect()
}

fn in_border_band(area: Area, x: f64, y: f64) -> bool {
    x < 0.1 * area.width_m
        || x > 0.9 * area.width_m
        || y < 0.1 * area.height_m
        || y > 0.9 * area.height_m
}

fn sample_far(rng: &mut ChaCha8Rng, area: Area) -> (f64, f64) {
    loop {
        let x = rng.gen_range(0.0..=area.width_m);
        let y = rng.gen_range(0.0..=area.height_m);
        if in_border_band(area, x, y) {
            return (x, y);
        }
    }
}

fn sample_near(
    rng: &mut ChaCha8Rng,
    area: Area,
    stations: &[(f64, f64)],
    radius: f64,
) -> (f64, f64) {
    loop {
        let (sx, sy) = stations[rng.gen_range(0..stations.len())];
        let angle = rng.gen_range(0.0..std::f64::consts::TAU);
        let r = radius * rng.gen::<f64>().sqrt();
        let (x, y) = (sx + r * angle.cos(), sy + r * angle.sin());
        if area.contains(x, y) {
            return (x, y);
        }
    }
}

fn nearest_station(stations: &[(f64, f64)], x: f64, y: f64) -> usize {
    stations
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| {
            let da = (a.0 - x).hypot(a.1 - y);
            let db = (b.0 - x).hypot(b.1 - y);
            da.total_cmp(&db)
        })
        .map(|(i, _)| i)
        .expect("at least one station")
}

/// Draws a scenario from `params`. The same `(params, seed)` always yields
/// the same scenario.
pub fn generate_scenario(
    params: &GenerationParams,
    seed: u64,
) -> Result<ScenarioConfig, ScenarioError> {
    params.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = params.chunk_size;

    let positions = station_positions(params.servers, params.area);
    let stations: Vec<StationSpec> = positions
        .iter()
        .enumerate()
        .map(|(i, &(x, y))| StationSpec {
            id: StationId(i as u32),
            x_m: x,
            y_m: y,
            p_max_mw: params.p_max_mw,
            blocks: (0..params.horizon)
                .map(|_| rng.gen_range(params.blocks_range.0..=params.blocks_range.1))
                .collect(),
        })
        .collect();

    let far_count = match params.placement {
        Placement::Uniform => 0,
        Placement::FarNear { far_fraction, .. } => {
            (far_fraction * params.clients as f64).round() as usize
        }
    };

    let arrival_hi = params.arrival_window.1.min(params.horizon - c);
    let arrival_lo = params.arrival_window.0.min(arrival_hi);

    let clients = (0..params.clients)
        .map(|i| {
            let (x, y) = match params.placement {
                Placement::Uniform => (
                    rng.gen_range(0.0..=params.area.width_m),
                    rng.gen_range(0.0..=params.area.height_m),
                ),
                Placement::FarNear { near_radius_m, .. } => {
                    if i < far_count {
                        sample_far(&mut rng, params.area)
                    } else {
                        sample_near(&mut rng, params.area, &positions, near_radius_m)
                    }
                }
            };
            let arrival = rng.gen_range(arrival_lo..=arrival_hi);
            let drawn = rng.gen_range(params.session_range.0..=params.session_range.1);
            let whole = (drawn / c).max(1) * c;
            let room = (params.horizon - arrival) / c * c;
            let session = whole.min(room);
            ClientSpec {
                id: ClientId(i as u32),
                group: nearest_station(&positions, x, y) as u32,
                x_m: x,
                y_m: y,
                arrival,
                departure: arrival + session,
                b_max_kb: params.b_max_kb,
            }
        })
        .collect();

    Ok(ScenarioConfig {
        horizon: params.horizon,
        chunk_size: c,
        area: params.area,
        alpha: params.alpha,
        ladder_kbps: params.ladder.clone(),
        stations,
        clients,
        weights: params.weights,
        rba_window: params.rba_window,
    })
}
