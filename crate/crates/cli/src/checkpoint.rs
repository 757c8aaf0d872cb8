//! Run checkpoints.
//!
//! One JSON object per run (`format` `lancer-run-checkpoint`, version 1),
//! rewritten atomically after every completed unit of work: an outer
//! iteration for amortized modes, an instance for single-instance mode. A
//! checkpoint with `complete: false` is a valid snapshot of an interrupted
//! run and can be evaluated as is.

use lancer_core::diffmodels::MlpModel;
use lancer_core::lancer::SurrogateModel;
use lancer_core::problems::ProblemFamily;
use serde::{Deserialize, Serialize};

use crate::config::Mode;
use crate::error::{CliError, CliResult, ErrorKind};

pub const CHECKPOINT_FORMAT: &str = "lancer-run-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

/// Best cost vector found for one test instance in single-instance mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZeroRecord {
    pub instance: usize,
    pub best_c: Vec<f64>,
    pub best_objective: f64,
    pub initial_objective: f64,
    pub solver_calls: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunCheckpoint {
    pub format: String,
    pub version: u32,
    pub config_hash: String,
    pub seed: u64,
    pub mode: Mode,
    pub family: ProblemFamily,
    /// Completed outer iterations (amortized modes) or instances (single
    /// instance mode).
    pub progress: usize,
    pub complete: bool,
    pub training_solver_calls: u64,
    pub target: Option<MlpModel>,
    pub surrogate: Option<SurrogateModel>,
    pub zero: Vec<ZeroRecord>,
}

impl RunCheckpoint {
    pub fn new(config_hash: String, seed: u64, mode: Mode, family: ProblemFamily) -> Self {
        RunCheckpoint {
            format: CHECKPOINT_FORMAT.to_string(),
            version: CHECKPOINT_VERSION,
            config_hash,
            seed,
            mode,
            family,
            progress: 0,
            complete: false,
            training_solver_calls: 0,
            target: None,
            surrogate: None,
            zero: Vec::new(),
        }
    }

    pub fn to_json(&self) -> CliResult<Vec<u8>> {
        lancer_core::json::to_vec_pretty(self).map_err(CliError::from)
    }

    /// Parses a checkpoint and checks that it holds what its mode needs.
    pub fn from_json(bytes: &[u8]) -> CliResult<Self> {
        let ck: RunCheckpoint = serde_json::from_slice(bytes)
            .map_err(|e| CliError::new(ErrorKind::Data, anyhow::anyhow!("malformed checkpoint: {e}")))?;
        if ck.format != CHECKPOINT_FORMAT || ck.version != CHECKPOINT_VERSION {
            return Err(CliError::data(format!(
                "expected {CHECKPOINT_FORMAT} v{CHECKPOINT_VERSION}, found {} v{}",
                ck.format, ck.version
            )));
        }
        let ok = match ck.mode {
            Mode::TwoStage | Mode::LancerPo | Mode::LancerPrior => ck.target.is_some(),
            Mode::ReusedM => ck.surrogate.is_some(),
            Mode::LancerZero => ck.zero.iter().enumerate().all(|(i, r)| r.instance == i),
            Mode::Optimal | Mode::Random => false,
        };
        if !ok {
            return Err(CliError::data(format!("checkpoint for {} is missing its model", ck.mode.name())));
        }
        Ok(ck)
    }
}
