//! Experiment driver: dataset generation, training, evaluation, sweeps and
//! reports, with reproducible file outputs.

pub mod args;
pub mod checkpoint;
pub mod commands;
pub mod config;
pub mod error;
pub mod files;

use args::{Cli, Command, Grid, RunArgs};
use config::RunConfig;
use error::{CliError, CliResult};

pub const WORKERS_ENV: &str = "LANCER_WORKERS";

fn resolve(run: &RunArgs, seed: Option<u64>) -> CliResult<RunConfig> {
    let file = match &run.config {
        Some(p) => Some(
            std::fs::read(p).map_err(|e| CliError::config(format!("reading config {}: {e}", p.display())))?,
        ),
        None => None,
    };
    RunConfig::resolve(file.as_deref(), &run.overrides(seed))
}

/// Runs one command and returns a line describing what was written.
pub fn run(cli: Cli) -> CliResult<String> {
    match cli.command {
        Command::Generate { run, seed } => {
            let cfg = resolve(&run, Some(seed))?;
            let out = commands::generate::run(&cfg)?;
            Ok(format!(
                "wrote {} ({} instances) and {} ({} instances), config {}",
                out.train.display(),
                out.manifest.train.instances,
                out.test.display(),
                out.manifest.test.instances,
                out.manifest.config_hash
            ))
        }
        Command::Train { run, seed } => {
            let cfg = resolve(&run, Some(seed))?;
            let art = commands::train::run(&cfg)?;
            Ok(format!(
                "trained {} in {}: {} solver calls, config {}",
                cfg.mode.name(),
                cfg.output_dir.display(),
                art.summary.solver_calls,
                art.summary.config_hash
            ))
        }
        Command::Evaluate { run, seed, checkpoint } => {
            let cfg = resolve(&run, seed)?;
            let (path, out) = commands::evaluate::run(&cfg, checkpoint.as_deref())?;
            Ok(format!(
                "wrote {}: mean objective {}, {} solver calls",
                path.display(),
                lancer_core::json::fmt_f64(out.mean_objective),
                out.solver_calls
            ))
        }
        Command::Sweep { run, seed, grid, axes } => {
            let cfg = resolve(&run, seed)?;
            let axes = match grid {
                Grid::Table4 if axes.is_empty() => commands::sweep::table4(),
                Grid::Table5 if axes.is_empty() => commands::sweep::table5(),
                Grid::Custom => axes
                    .iter()
                    .map(|a| commands::sweep::parse_axis(a))
                    .collect::<CliResult<Vec<_>>>()?,
                _ => return Err(CliError::config("--axis is only allowed with --grid custom")),
            };
            let (path, out) = commands::sweep::run(&cfg, grid.name(), &axes)?;
            Ok(format!(
                "wrote {}: {} cells ok, {} failed",
                path.display(),
                out.succeeded,
                out.failed
            ))
        }
        Command::Report { runs, out } => {
            let (path, report) = commands::report::run(&runs, &out)?;
            Ok(format!("wrote {} from {} runs", path.display(), report.inputs.len()))
        }
    }
}

/// Sizes the global worker pool from `LANCER_WORKERS`, if set.
pub fn init_workers() -> CliResult<()> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::config(format!("{WORKERS_ENV} must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::config(format!("cannot start {n} workers: {e}")))
}
