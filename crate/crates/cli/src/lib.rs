//! Scenario generation, single runs and paired scheduler comparisons.
//!
//! The binary in `main.rs` is a thin clap front end over these functions.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use dashsim_core::metrics::{write_client_csv, write_summary_csv};
use dashsim_core::{
    check_invariants, generate_scenario, load_scenario, run_metrics, run_simulation, save_scenario,
    scheduler_by_name, EngineError, GenerationParams, MetricsError, OracleError, Placement,
    RunMetrics, ScenarioConfig, ScenarioError, SchedulerError, SimulationTrace, SummaryRow,
    SCHEDULER_NAMES,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),

    #[error(transparent)]
    Scheduler(#[from] SchedulerError),

    #[error(transparent)]
    Engine(#[from] EngineError),

    #[error(transparent)]
    Metrics(#[from] MetricsError),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// Process exit code: 2 for bad inputs, 3 for scheduler contract violations.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Engine(EngineError::InvalidScenario(_)) => 2,
            CliError::Engine(_) => 3,
            CliError::Scheduler(SchedulerError::Oracle(OracleError::Engine(
                EngineError::InvalidScenario(_),
            ))) => 2,
            CliError::Scheduler(SchedulerError::Oracle(OracleError::Engine(_))) => 3,
            CliError::Metrics(_) | CliError::Io { .. } => 1,
            CliError::Scenario(_) | CliError::Scheduler(_) | CliError::Usage(_) => 2,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> CliError + '_ {
    move |e| CliError::Io {
        path: path.to_path_buf(),
        source: e.into(),
    }
}

/// One-line description printed after generating a scenario.
pub fn summary_line(cfg: &ScenarioConfig) -> String {
    let ladder: Vec<String> = cfg.ladder().rates().iter().map(|r| r.to_string()).collect();
    format!(
        "S={} K={} horizon={} C={} ladder=[{}] hash={}",
        cfg.clients.len(),
        cfg.stations.len(),
        cfg.horizon,
        cfg.chunk_size,
        ladder.join(","),
        cfg.hash()
    )
}

pub fn cmd_generate(
    params: &GenerationParams,
    seed: u64,
    out: &Path,
) -> Result<ScenarioConfig, CliError> {
    let cfg = generate_scenario(params, seed)?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    save_scenario(&cfg, out)?;
    Ok(cfg)
}

#[derive(Debug, Clone)]
pub enum ScenarioSource {
    File(PathBuf),
    Generated(GenerationParams, u64),
}

#[derive(Debug, Clone)]
pub struct RunSpec {
    pub scenario: ScenarioSource,
    pub scheduler: String,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub write_trace: bool,
}

#[derive(Debug)]
pub struct RunOutput {
    pub summary: SummaryRow,
    pub metrics: RunMetrics,
    pub trace: SimulationTrace,
}

/// Runs one scheduler on one scenario and returns the trace with its metrics.
pub fn simulate(
    cfg: &ScenarioConfig,
    scheduler: &str,
    seed: u64,
) -> Result<(SimulationTrace, RunMetrics), CliError> {
    let mut sched = scheduler_by_name(scheduler, cfg)?;
    let trace = run_simulation(cfg, sched.as_mut(), seed)?;
    let metrics = run_metrics(cfg, &trace)?;
    Ok((trace, metrics))
}

/// Writes `clients.csv`, `summary.csv` and optionally `trace.jsonl` into the output directory.
pub fn cmd_run(spec: &RunSpec) -> Result<RunOutput, CliError> {
    if !SCHEDULER_NAMES.contains(&spec.scheduler.as_str()) {
        return Err(SchedulerError::UnknownName(spec.scheduler.clone()).into());
    }
    let cfg = match &spec.scenario {
        ScenarioSource::File(path) => load_scenario(path)?,
        ScenarioSource::Generated(params, seed) => generate_scenario(params, *seed)?,
    };
    let (trace, metrics) = simulate(&cfg, &spec.scheduler, spec.seed)?;
    let summary = SummaryRow::new(&trace.scenario_hash, &spec.scheduler, spec.seed, &metrics);

    let dir = &spec.out_dir;
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = dir.join("clients.csv");
    let file = File::create(&path).map_err(io_err(&path))?;
    write_client_csv(BufWriter::new(file), &metrics.clients).map_err(csv_err(&path))?;
    let path = dir.join("summary.csv");
    let file = File::create(&path).map_err(io_err(&path))?;
    write_summary_csv(BufWriter::new(file), &summary).map_err(csv_err(&path))?;
    if spec.write_trace {
        let path = dir.join("trace.jsonl");
        let file = File::create(&path).map_err(io_err(&path))?;
        let mut w = BufWriter::new(file);
        trace.write_jsonl(&mut w).map_err(io_err(&path))?;
        w.flush().map_err(io_err(&path))?;
    }
    Ok(RunOutput {
        summary,
        metrics,
        trace,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    Desk,
    Paper,
}

impl Profile {
    pub fn parse(name: &str) -> Option<Profile> {
        match name {
            "desk" => Some(Profile::Desk),
            "paper" => Some(Profile::Paper),
            _ => None,
        }
    }

    pub fn base(self) -> GenerationParams {
        match self {
            Profile::Desk => GenerationParams::desk(),
            Profile::Paper => GenerationParams::paper(),
        }
    }

    pub fn params(self, clients: usize, far_near: bool) -> GenerationParams {
        GenerationParams {
            clients,
            placement: if far_near {
                Placement::FAR_NEAR
            } else {
                Placement::Uniform
            },
            ..self.base()
        }
    }
}

#[derive(Debug, Clone)]
pub struct CompareSpec {
    pub counts: Vec<usize>,
    pub schedulers: Vec<String>,
    pub seeds: Vec<u64>,
    pub profile: Profile,
    pub far_near: bool,
    /// Worker threads for independent cells; `None` uses rayon's default.
    pub threads: Option<usize>,
    /// Count invariant violations on every trace.
    pub check_invariants: bool,
}

/// One line of the comparison table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub clients: usize,
    pub scheduler: String,
    pub seed: u64,
    pub scenario_hash: String,
    pub mean_throughput_kbps: f64,
    pub mean_delay_slots: f64,
    pub switching_freq: f64,
    pub switching_mag_kbps: f64,
    pub switching_mag_per_chunk_kbps: f64,
    pub jain: f64,
    pub rmsd: f64,
    pub total_utility: f64,
    pub mean_stall_ratio: f64,
    #[serde(skip)]
    pub invariant_violations: usize,
}

impl CompareRow {
    fn new(clients: usize, scheduler: &str, seed: u64, hash: String, m: &RunMetrics) -> Self {
        CompareRow {
            clients,
            scheduler: scheduler.to_string(),
            seed,
            scenario_hash: hash,
            mean_throughput_kbps: m.mean_effective_kbps,
            mean_delay_slots: m.mean_delay_slots,
            switching_freq: m.switching_frequency,
            switching_mag_kbps: m.switching_magnitude_kbps,
            switching_mag_per_chunk_kbps: m.switching_magnitude_per_chunk_kbps,
            jain: m.jain_index,
            rmsd: m.rmsd_utilization,
            total_utility: m.total_utility,
            mean_stall_ratio: m.mean_stall_ratio,
            invariant_violations: 0,
        }
    }
}

/// Runs every (count, scheduler, seed) cell. Scenarios are generated once per
/// (count, seed) and shared by all schedulers. Rows come back ordered by
/// count, then seed, then scheduler as listed.
pub fn compare(spec: &CompareSpec) -> Result<Vec<CompareRow>, CliError> {
    if spec.counts.is_empty() || spec.schedulers.is_empty() || spec.seeds.is_empty() {
        return Err(CliError::Usage(
            "counts, schedulers and seeds must be non-empty".into(),
        ));
    }
    if let Some(bad) = spec
        .schedulers
        .iter()
        .find(|s| !SCHEDULER_NAMES.contains(&s.as_str()))
    {
        return Err(SchedulerError::UnknownName(bad.clone()).into());
    }
    let work = || -> Result<Vec<CompareRow>, CliError> {
        let scenarios: Vec<(usize, u64)> = spec
            .counts
            .iter()
            .flat_map(|&n| spec.seeds.iter().map(move |&s| (n, s)))
            .collect();
        let configs: Vec<ScenarioConfig> = scenarios
            .par_iter()
            .map(|&(n, seed)| generate_scenario(&spec.profile.params(n, spec.far_near), seed))
            .collect::<Result<_, _>>()?;
        let cells: Vec<(usize, &str)> = (0..configs.len())
            .flat_map(|i| spec.schedulers.iter().map(move |s| (i, s.as_str())))
            .collect();
        cells
            .par_iter()
            .map(|&(i, sched)| {
                let cfg = &configs[i];
                let (n, seed) = scenarios[i];
                let (trace, m) = simulate(cfg, sched, seed)?;
                let mut row = CompareRow::new(n, sched, seed, trace.scenario_hash.clone(), &m);
                if spec.check_invariants {
                    row.invariant_violations = check_invariants(cfg, &trace).len();
                }
                Ok(row)
            })
            .collect()
    };
    match spec.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| CliError::Usage(e.to_string()))?
            .install(work),
        None => work(),
    }
}

pub fn write_compare_csv<W: Write>(out: W, rows: &[CompareRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn cmd_compare(spec: &CompareSpec, out: &Path) -> Result<Vec<CompareRow>, CliError> {
    let rows = compare(spec)?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let file = File::create(out).map_err(io_err(out))?;
    write_compare_csv(BufWriter::new(file), &rows).map_err(csv_err(out))?;
    Ok(rows)
}
