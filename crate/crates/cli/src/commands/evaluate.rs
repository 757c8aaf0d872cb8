use std::path::{Path, PathBuf};

use lancer_core::lancer::{deploy_reused_m, ZeroInit};
use lancer_core::metrics::{evaluate_target, optimal_objectives, random_baseline_objectives, EvalReport};
use lancer_core::problems::{eval_objective, Dataset, FamilyTag};
use lancer_core::solvers::{solve_family, SolverStats};
use lancer_core::Error as CoreError;
use serde::{Deserialize, Serialize};

use crate::checkpoint::RunCheckpoint;
use crate::config::{Mode, RunConfig};
use crate::error::{CliError, CliResult, Context};
use crate::files::{self, CHECKPOINT_FILE, TEST_FILE};

pub const EVAL_FORMAT: &str = "lancer-eval";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalOutput {
    pub format: String,
    pub version: u32,
    pub config_hash: String,
    pub seed: u64,
    pub mode: Mode,
    pub family: FamilyTag,
    pub test_sha256: String,
    pub checkpoint_sha256: Option<String>,
    /// False when the checkpoint came from an interrupted run.
    pub checkpoint_complete: Option<bool>,
    /// Test instances scored; fewer than the split only for an interrupted
    /// single-instance run.
    pub instances: usize,
    pub objectives: Vec<f64>,
    pub mean_objective: f64,
    /// Regret and normalized decision loss where an exact optimum exists.
    pub report: Option<EvalReport>,
    /// Solver calls made to produce `objectives`.
    pub solver_calls: u64,
    /// Solver calls spent on the random baseline, reported separately.
    pub baseline_solver_calls: u64,
}

/// Objectives of the method on `test` and the calls spent on them.
fn method_objectives(cfg: &RunConfig, ck: Option<&RunCheckpoint>, test: &Dataset) -> CliResult<(Vec<f64>, u64)> {
    let family = cfg.problem_family();
    let mut stats = SolverStats::new();
    let objectives = match cfg.mode {
        Mode::Optimal => optimal_objectives(test)?,
        Mode::Random => random_baseline_objectives(test, cfg.seed, &mut stats)?,
        Mode::TwoStage | Mode::LancerPo | Mode::LancerPrior => {
            let target = ck.and_then(|c| c.target.as_ref()).expect("validated checkpoint");
            evaluate_target(target, test, &mut stats)?
        }
        Mode::ReusedM => {
            let surrogate = ck.and_then(|c| c.surrogate.as_ref()).expect("validated checkpoint");
            let mut out = Vec::with_capacity(test.len());
            for (i, inst) in test.instances().iter().enumerate() {
                let d = deploy_reused_m(inst, &family, surrogate, &cfg.lancer, &ZeroInit::Heuristic)
                    .map_err(|e| CoreError::at(i, e))?;
                stats.merge(&d.stats);
                out.push(d.objective);
            }
            out
        }
        Mode::LancerZero => {
            let records = &ck.expect("validated checkpoint").zero;
            let mut out = Vec::with_capacity(records.len());
            for (r, inst) in records.iter().zip(test.instances()) {
                let solve = solve_family(&family, &r.best_c, &inst.z, &mut stats)
                    .and_then(|s| eval_objective(&family, &s, &inst.z))
                    .map_err(|e| CoreError::at(r.instance, e))?;
                out.push(solve);
            }
            out
        }
    };
    Ok((objectives, stats.call_count()))
}

/// Scores a trained checkpoint (or a baseline mode) on the test split.
pub fn evaluate_in_memory(
    cfg: &RunConfig,
    ck: Option<&RunCheckpoint>,
    checkpoint_sha256: Option<String>,
) -> CliResult<EvalOutput> {
    if cfg.mode.is_trainable() {
        let ck = ck.ok_or_else(|| CliError::data(format!("mode {} needs a checkpoint", cfg.mode.name())))?;
        if ck.config_hash != cfg.hash() || ck.mode != cfg.mode || ck.seed != cfg.seed {
            return Err(CliError::data(format!(
                "checkpoint was written by config {} (mode {}, seed {}), not {} (mode {}, seed {})",
                ck.config_hash,
                ck.mode.name(),
                ck.seed,
                cfg.hash(),
                cfg.mode.name(),
                cfg.seed
            )));
        }
    }
    let split = files::load_split(cfg, TEST_FILE)?;
    let test = match (cfg.mode, ck) {
        (Mode::LancerZero, Some(ck)) if ck.zero.len() < split.dataset.len() => split.dataset.slice(0..ck.zero.len())?,
        _ => split.dataset.clone(),
    };
    if test.is_empty() {
        return Err(CliError::data("the checkpoint holds no finished instances"));
    }
    let (objectives, solver_calls) = method_objectives(cfg, ck, &test).ctx(format!("evaluating {}", cfg.mode.name()))?;

    let family = cfg.problem_family();
    let mut baseline_solver_calls = 0;
    let report = if cfg.family == FamilyTag::PortfolioMinlp {
        None
    } else {
        let optimal = optimal_objectives(&test).ctx("computing exact optima")?;
        let random = if cfg.mode == Mode::Random {
            Some(objectives.clone())
        } else if cfg.evaluation.random_baseline {
            let mut stats = SolverStats::new();
            let r = random_baseline_objectives(&test, cfg.seed, &mut stats).ctx("random baseline")?;
            baseline_solver_calls = stats.call_count();
            Some(r)
        } else {
            None
        };
        Some(EvalReport::new(
            cfg.mode.name(),
            family,
            objectives.clone(),
            optimal,
            random.as_deref(),
            solver_calls,
        )?)
    };
    let mean_objective = objectives.iter().sum::<f64>() / objectives.len() as f64;
    Ok(EvalOutput {
        format: EVAL_FORMAT.to_string(),
        version: 1,
        config_hash: cfg.hash(),
        seed: cfg.seed,
        mode: cfg.mode,
        family: cfg.family,
        test_sha256: split.sha256,
        checkpoint_sha256,
        checkpoint_complete: ck.map(|c| c.complete),
        instances: test.len(),
        objectives,
        mean_objective,
        report,
        solver_calls,
        baseline_solver_calls,
    })
}

pub fn eval_file_name(mode: Mode) -> String {
    format!("eval_{}.json", mode.name())
}

/// Loads the checkpoint (if the mode has one), evaluates and writes
/// `eval_<mode>.json` to the output directory.
pub fn run(cfg: &RunConfig, checkpoint: Option<&Path>) -> CliResult<(PathBuf, EvalOutput)> {
    let loaded = if cfg.mode.is_trainable() {
        let path = checkpoint
            .map(Path::to_path_buf)
            .unwrap_or_else(|| files::output_path(cfg, CHECKPOINT_FILE));
        let bytes = files::read(&path)?;
        let ck = RunCheckpoint::from_json(&bytes).map_err(|e| e.context(format!("loading {}", path.display())))?;
        Some((ck, files::sha256_hex(&bytes)))
    } else {
        None
    };
    let out = evaluate_in_memory(cfg, loaded.as_ref().map(|(c, _)| c), loaded.as_ref().map(|(_, h)| h.clone()))?;
    let path = files::output_path(cfg, &eval_file_name(cfg.mode));
    files::write_atomic(&path, &files::pretty_json(&out)?).ctx("writing evaluation")?;
    Ok((path, out))
}
