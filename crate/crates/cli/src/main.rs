// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use clap::{Parser, Subcommand};
use commands::Outputs;
use config::{RunConfig, SEED_VAR, THREADS_VAR};
use hrect::Exec;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "hrect", version, about = "Heisenberg rectifiability toolkit")]
struct Cli {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides `seed` (also `HRECT_SEED`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (also `HRECT_THREADS`); defaults to available parallelism.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory (overrides `io.out`; default `out`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit the Juillet curve at `curve.generations`.
    Curve,
    /// Build or import the point cloud and profile its regularity.
    Cloud,
    /// Build the dyadic cube system and check it.
    Cubes,
    /// Coefficient fields on every cube.
    Coeff,
    /// Carleson sums, or the dichotomy experiment.
    Carleson {
        #[arg(long)]
        experiment: Option<String>,
        #[arg(long)]
        generations: Option<usize>,
    },
    /// Corona decomposition with its checks.
    Corona,
    /// Full property suite on the configured cloud.
    Verify,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Curve => "curve",
            Command::Cloud => "cloud",
            Command::Cubes => "cubes",
            Command::Coeff => "coeff",
            Command::Carleson { .. } => "carleson",
            Command::Corona => "corona",
            Command::Verify => "verify",
        }
    }
}

const CONFIG_ERROR: u8 = 2;

fn env_override<T: std::str::FromStr>(var: &str) -> Result<Option<T>, String> {
    match std::env::var(var) {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| format!("invalid config: `{var}` is not a valid value: `{v}`")),
        Err(_) => Ok(None),
    }
}

fn resolve(cli: &Cli) -> Result<RunConfig, String> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path).map_err(|e| e.to_string())?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed.or(env_override(SEED_VAR)?) {
        cfg.seed = seed;
    }
    if let Some(threads) = cli.threads.or(env_override(THREADS_VAR)?) {
        cfg.threads = Some(threads);
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match resolve(&cli) {
        Ok(cfg) => cfg,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(CONFIG_ERROR);
        }
    };
    #[cfg(feature = "parallel")]
    if let Some(n) = cfg.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    let dir = cli.out.clone().or_else(|| cfg.io.out.clone()).unwrap_or_else(|| PathBuf::from("out"));
    match run(&cli.command, &cfg, &dir) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("verification failed; see {}", dir.join("verify.json").display());
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: &Command, cfg: &RunConfig, dir: &std::path::Path) -> anyhow::Result<bool> {
    let exec = Exec::default();
    let mut out = Outputs::new(dir)?;
    let mut passed = true;
    match command {
        Command::Curve => commands::curve(cfg, &mut out)?,
        Command::Cloud => commands::cloud(cfg, &mut out)?,
        Command::Cubes => commands::cubes(cfg, &mut out, exec)?,
        Command::Coeff => commands::coeff(cfg, &mut out, exec)?,
        Command::Carleson { experiment, generations } => commands::carleson(cfg, &mut out, exec, experiment.as_deref(), *generations)?,
        Command::Corona => commands::corona(cfg, &mut out, exec)?,
        Command::Verify => passed = commands::verify(cfg, &mut out, exec)?,
    }
    out.finish(command.name(), cfg)?;
    Ok(passed)
}
