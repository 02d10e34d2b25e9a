use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use dashsim_cli::{
    cmd_compare, cmd_generate, cmd_run, summary_line, CliError, CompareSpec, Profile, RunSpec,
    ScenarioSource,
};
use dashsim_core::GenerationParams;

#[derive(Parser)]
#[command(
    name = "dashsim",
    version,
    about = "Multi-station adaptive streaming simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a scenario file.
    Generate {
        /// Defaults to the profile's client count.
        #[arg(long)]
        clients: Option<usize>,
        #[arg(long)]
        servers: Option<usize>,
        #[arg(long)]
        horizon: Option<u32>,
        #[arg(long)]
        chunk: Option<u32>,
        /// Base parameter set: `paper` or the scaled-down `desk`.
        #[arg(long, default_value = "paper")]
        profile: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Place 30% of clients near the area border, the rest near a station.
        #[arg(long)]
        far_near: bool,
    },
    /// Run one scheduler on a scenario file.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        scheduler: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Also write the per-slot trace as JSON lines.
        #[arg(long)]
        trace: bool,
    },
    /// Sweep client counts across schedulers on paired scenarios.
    Compare {
        #[arg(long, value_delimiter = ',', required = true)]
        counts: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "greedy,bba,rba")]
        schedulers: Vec<String>,
        /// Seeds as a comma list or an inclusive range like `1..10`.
        #[arg(long, default_value = "1")]
        seeds: String,
        /// Output CSV file.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "desk")]
        profile: String,
        #[arg(long)]
        far_near: bool,
        #[arg(long, env = "DASHSIM_THREADS")]
        threads: Option<usize>,
    },
}

fn parse_seeds(text: &str) -> Result<Vec<u64>, CliError> {
    let bad = || CliError::Usage(format!("invalid seed list `{text}`"));
    if let Some((a, b)) = text.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    text.split(',')
        .map(|s| s.trim().parse().map_err(|_| bad()))
        .collect()
}

fn parse_profile(name: &str) -> Result<Profile, CliError> {
    Profile::parse(name).ok_or_else(|| {
        CliError::Usage(format!("unknown profile `{name}` (expected desk or paper)"))
    })
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Generate {
            clients,
            servers,
            horizon,
            chunk,
            profile,
            seed,
            out,
            far_near,
        } => {
            let profile = parse_profile(&profile)?;
            let base = profile.params(profile.base().clients, far_near);
            let params = GenerationParams {
                clients: clients.unwrap_or(base.clients),
                servers: servers.unwrap_or(base.servers),
                horizon: horizon.unwrap_or(base.horizon),
                chunk_size: chunk.unwrap_or(base.chunk_size),
                ..base
            };
            let cfg = cmd_generate(&params, seed, &out)?;
            println!("{}", summary_line(&cfg));
        }
        Command::Run {
            scenario,
            scheduler,
            seed,
            out,
            trace,
        } => {
            let spec = RunSpec {
                scenario: ScenarioSource::File(scenario),
                scheduler,
                seed,
                out_dir: out,
                write_trace: trace,
            };
            let result = cmd_run(&spec)?;
            let s = &result.summary;
            println!(
                "{} on {}: utility={:.4} jain={:.4} mean_throughput={:.1} kbps",
                s.scheduler, s.scenario_hash, s.total_utility, s.jain_index, s.mean_effective_kbps
            );
        }
        Command::Compare {
            counts,
            schedulers,
            seeds,
            out,
            profile,
            far_near,
            threads,
        } => {
            let profile = parse_profile(&profile)?;
            let spec = CompareSpec {
                counts,
                schedulers,
                seeds: parse_seeds(&seeds)?,
                profile,
                far_near,
                threads,
                check_invariants: false,
            };
            let rows = cmd_compare(&spec, &out)
                .with_context(|| format!("comparison into {}", out.display()))?;
            println!("wrote {} rows to {}", rows.len(), out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = err
                .downcast_ref::<CliError>()
                .map_or(1, CliError::exit_code);
            ExitCode::from(code as u8)
        }
    }
}
