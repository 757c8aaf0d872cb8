use std::time::Instant;

use lancer_core::lancer::{
    pretrain_landscape, train_predict_optimize_with, train_prior_with, train_two_stage, train_zero, HistoryRow,
    LancerConfig, ZeroInit,
};
use lancer_core::metrics::write_history_csv;
use lancer_core::problems::{FamilyTag, Sense};
use lancer_core::rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::checkpoint::{RunCheckpoint, ZeroRecord};
use crate::config::{Mode, RunConfig};
use crate::error::{CliError, CliResult, Context};
use crate::files::{self, LoadedSplit, CHECKPOINT_FILE, HISTORY_FILE, SUMMARY_FILE, TEST_FILE, TIMING_FILE, TRAIN_FILE};

pub const SUMMARY_FORMAT: &str = "lancer-run-summary";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub format: String,
    pub version: u32,
    pub config_hash: String,
    pub seed: u64,
    pub mode: Mode,
    pub family: FamilyTag,
    pub sense: Sense,
    pub config: Value,
    pub train_sha256: Option<String>,
    pub test_sha256: Option<String>,
    /// Instances the run optimized over: the training split, or the test
    /// split in single-instance mode.
    pub instances: usize,
    pub iterations: usize,
    pub solver_calls: u64,
    pub expected_solver_calls: u64,
    pub final_surrogate_mse: Option<f64>,
    pub final_mean_decision_loss: Option<f64>,
    /// Mean best objective found per instance (single-instance and
    /// pretraining modes).
    pub final_objective: Option<f64>,
    /// Seconds; zero unless `record_wall_time` is set.
    pub wall_time: f64,
    pub complete: bool,
}

/// Measured times, kept out of every deterministic output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub config_hash: String,
    pub seed: u64,
    pub wall_time: f64,
    pub solver_wall_time: f64,
}

#[derive(Debug, Clone)]
pub struct TrainArtifacts {
    pub checkpoint: RunCheckpoint,
    pub history: Vec<HistoryRow>,
    pub summary: Summary,
    pub timing: Timing,
}

/// Receives the checkpoint and history after every completed unit of work.
pub type Sink<'a> = dyn FnMut(&RunCheckpoint, &[HistoryRow]) -> CliResult<()> + 'a;

/// Solver calls each mode must use.
pub fn expected_calls(cfg: &RunConfig, instances: usize) -> u64 {
    let l = &cfg.lancer;
    let (t, n, p) = (l.outer_iters as u64, instances as u64, l.n_perturb as u64 + 1);
    match cfg.mode {
        Mode::TwoStage | Mode::Optimal | Mode::Random => 0,
        Mode::LancerPo | Mode::LancerPrior => t * n,
        Mode::LancerZero | Mode::ReusedM => t * n * p,
    }
}

fn scrub(mut row: HistoryRow, keep_time: bool) -> HistoryRow {
    if !keep_time {
        row.wall_time = 0.0;
    }
    row
}

/// Per-instance config of single-instance mode: each instance gets its own
/// derived seed so instances are independent of processing order.
fn instance_config(cfg: &LancerConfig, index: usize) -> LancerConfig {
    LancerConfig {
        seed: rng::derive(cfg.seed, index as u64),
        ..cfg.clone()
    }
}

/// Averages per-instance histories iteration by iteration; calls are summed.
fn merge_zero_histories(histories: &[Vec<HistoryRow>]) -> Vec<HistoryRow> {
    let t = histories.iter().map(Vec::len).min().unwrap_or(0);
    let n = histories.len() as f64;
    (0..t)
        .map(|k| {
            let rows = histories.iter().map(|h| &h[k]);
            HistoryRow {
                iteration: k + 1,
                buffer_size: rows.clone().map(|r| r.buffer_size).max().unwrap_or(0),
                surrogate_mse: rows.clone().map(|r| r.surrogate_mse).sum::<f64>() / n,
                mean_decision_loss: rows.clone().map(|r| r.mean_decision_loss).sum::<f64>() / n,
                solver_calls: rows.clone().map(|r| r.solver_calls).sum(),
                wall_time: rows.map(|r| r.wall_time).fold(0.0, f64::max),
            }
        })
        .collect()
}

fn load_for(cfg: &RunConfig) -> CliResult<(Option<LoadedSplit>, Option<LoadedSplit>)> {
    match cfg.mode {
        Mode::LancerZero => Ok((None, Some(files::load_split(cfg, TEST_FILE)?))),
        _ => Ok((Some(files::load_split(cfg, TRAIN_FILE)?), None)),
    }
}

/// Runs training for `cfg` without writing anything; `sink` sees every
/// intermediate checkpoint.
pub fn train_in_memory(cfg: &RunConfig, sink: &mut Sink<'_>) -> CliResult<TrainArtifacts> {
    if !cfg.mode.is_trainable() {
        return Err(CliError::config(format!("mode {} has nothing to train", cfg.mode.name())));
    }
    let start = Instant::now();
    let (train, test) = load_for(cfg)?;
    let family = cfg.problem_family();
    let keep_time = cfg.record_wall_time;
    let mut ck = RunCheckpoint::new(cfg.hash(), cfg.seed, cfg.mode, family);
    let mut history: Vec<HistoryRow> = Vec::new();
    let mut final_objective = None;
    let solver_wall_time;
    let instances;

    match cfg.mode {
        Mode::TwoStage => {
            let ds = &train.as_ref().expect("loaded").dataset;
            instances = ds.len();
            ck.target = Some(train_two_stage(ds, &family, &cfg.lancer).ctx("two-stage training")?);
            solver_wall_time = 0.0;
        }
        Mode::LancerPo | Mode::LancerPrior => {
            let ds = &train.as_ref().expect("loaded").dataset;
            instances = ds.len();
            let mut failure: Option<CliError> = None;
            let outcome = {
                let ck = &mut ck;
                let history = &mut history;
                let failure = &mut failure;
                let mut observer = |row: &HistoryRow, target: &lancer_core::lancer::TargetModel| {
                    history.push(scrub(row.clone(), keep_time));
                    ck.progress = row.iteration;
                    ck.training_solver_calls = row.solver_calls;
                    ck.target = Some(target.clone());
                    sink(ck, history).map_err(|e| {
                        let msg = e.to_string();
                        *failure = Some(e);
                        lancer_core::Error::InvalidArgument(format!("checkpoint sink failed: {msg}"))
                    })
                };
                if cfg.mode == Mode::LancerPo {
                    train_predict_optimize_with(ds, &family, &cfg.lancer, &mut observer)
                } else {
                    train_prior_with(ds, &family, &cfg.lancer, &mut observer)
                }
            };
            if let Some(e) = failure {
                return Err(e);
            }
            let outcome = outcome.ctx(format!("{} training", cfg.mode.name()))?;
            ck.target = Some(outcome.target);
            ck.surrogate = outcome.surrogate;
            ck.training_solver_calls = outcome.stats.call_count();
            solver_wall_time = outcome.stats.wall_time_total().as_secs_f64();
        }
        Mode::LancerZero => {
            let ds = &test.as_ref().expect("loaded").dataset;
            instances = ds.len();
            let chunk = rayon::current_num_threads().max(1);
            let mut per_instance: Vec<Vec<HistoryRow>> = Vec::with_capacity(ds.len());
            let mut solver_time = 0.0;
            for (c, block) in ds.instances().chunks(chunk).enumerate() {
                let results: Vec<_> = block
                    .par_iter()
                    .enumerate()
                    .map(|(j, inst)| {
                        let i = c * chunk + j;
                        train_zero(inst, &family, &instance_config(&cfg.lancer, i), &ZeroInit::Heuristic)
                            .map_err(|e| CliError::from(lancer_core::Error::at(i, e)))
                    })
                    .collect();
                for (j, res) in results.into_iter().enumerate() {
                    let out = res.ctx("single-instance training")?;
                    solver_time += out.stats.wall_time_total().as_secs_f64();
                    ck.zero.push(ZeroRecord {
                        instance: c * chunk + j,
                        best_c: out.best_c,
                        best_objective: out.best_objective,
                        initial_objective: out.initial_objective,
                        solver_calls: out.stats.call_count(),
                    });
                    per_instance.push(out.history.into_iter().map(|r| scrub(r, keep_time)).collect());
                }
                ck.progress = ck.zero.len();
                ck.training_solver_calls = ck.zero.iter().map(|r| r.solver_calls).sum();
                history = merge_zero_histories(&per_instance);
                sink(&ck, &history)?;
            }
            solver_wall_time = solver_time;
            let n = ck.zero.len().max(1) as f64;
            final_objective = Some(ck.zero.iter().map(|r| r.best_objective).sum::<f64>() / n);
        }
        Mode::ReusedM => {
            let ds = &train.as_ref().expect("loaded").dataset;
            instances = ds.len();
            let out = pretrain_landscape(ds, &family, &cfg.lancer).ctx("landscape pretraining")?;
            history = out.history.into_iter().map(|r| scrub(r, keep_time)).collect();
            ck.progress = history.len();
            ck.training_solver_calls = out.stats.call_count();
            ck.surrogate = Some(out.surrogate);
            let n = out.best_objectives.len().max(1) as f64;
            final_objective = Some(out.best_objectives.iter().sum::<f64>() / n);
            solver_wall_time = out.stats.wall_time_total().as_secs_f64();
        }
        Mode::Optimal | Mode::Random => unreachable!("checked above"),
    }

    ck.complete = true;
    sink(&ck, &history)?;
    let wall = start.elapsed().as_secs_f64();
    let last = history.last();
    let summary = Summary {
        format: SUMMARY_FORMAT.to_string(),
        version: 1,
        config_hash: cfg.hash(),
        seed: cfg.seed,
        mode: cfg.mode,
        family: cfg.family,
        sense: cfg.sense,
        config: cfg.echo(),
        train_sha256: train.as_ref().map(|s| s.sha256.clone()),
        test_sha256: test.as_ref().map(|s| s.sha256.clone()),
        instances,
        iterations: history.len(),
        solver_calls: ck.training_solver_calls,
        expected_solver_calls: expected_calls(cfg, instances),
        final_surrogate_mse: last.map(|r| r.surrogate_mse),
        final_mean_decision_loss: last.map(|r| r.mean_decision_loss),
        final_objective,
        wall_time: if keep_time { wall } else { 0.0 },
        complete: ck.complete,
    };
    let timing = Timing {
        config_hash: summary.config_hash.clone(),
        seed: cfg.seed,
        wall_time: wall,
        solver_wall_time,
    };
    Ok(TrainArtifacts {
        checkpoint: ck,
        history,
        summary,
        timing,
    })
}

pub fn history_bytes(cfg: &RunConfig, rows: &[HistoryRow]) -> CliResult<Vec<u8>> {
    let mut out = Vec::new();
    write_history_csv(rows, &mut out, Some(&files::csv_comment(cfg, &[])))?;
    Ok(out)
}

/// Trains and writes checkpoint, history, summary and timing files. The
/// checkpoint and history are rewritten after every completed unit of work.
pub fn run(cfg: &RunConfig) -> CliResult<TrainArtifacts> {
    let ck_path = files::output_path(cfg, CHECKPOINT_FILE);
    let hist_path = files::output_path(cfg, HISTORY_FILE);
    let mut sink = |ck: &RunCheckpoint, rows: &[HistoryRow]| -> CliResult<()> {
        files::write_atomic(&hist_path, &history_bytes(cfg, rows)?).ctx("writing history")?;
        files::write_atomic(&ck_path, &ck.to_json()?).ctx("writing checkpoint")
    };
    let art = train_in_memory(cfg, &mut sink)?;
    files::write_atomic(&files::output_path(cfg, SUMMARY_FILE), &files::pretty_json(&art.summary)?)
        .ctx("writing summary")?;
    files::write_atomic(&files::output_path(cfg, TIMING_FILE), &files::pretty_json(&art.timing)?)
        .ctx("writing timing")?;
    Ok(art)
}
