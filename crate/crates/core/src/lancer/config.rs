use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hyperparameters shared by every training mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LancerConfig {
    /// Outer alternations `T`.
    pub outer_iters: usize,
    /// Surrogate (landscape model) Adam steps per outer iteration.
    pub w_updates: usize,
    /// Target Adam steps per outer iteration.
    pub theta_updates: usize,
    pub lr_w: f64,
    pub lr_theta: f64,
    /// Weight of the prediction penalty `λ‖c_θ(y) − z‖²` in predict-then-optimize mode.
    pub lambda: f64,
    /// Perturbed cost vectors evaluated per outer iteration in zero mode.
    pub n_perturb: usize,
    pub perturb_scale: f64,
    pub seed: u64,
    /// Hidden widths of the landscape model.
    pub surrogate_hidden: Vec<usize>,
    /// Hidden widths of the target model; empty means linear.
    pub target_hidden: Vec<usize>,
    /// Rows per surrogate update; `None` uses the full buffer up to 1000 rows.
    pub w_batch_size: Option<usize>,
    /// Oldest buffer entries are dropped beyond this many.
    pub buffer_capacity: Option<usize>,
    /// Adam steps of the two-stage warm start.
    pub two_stage_updates: usize,
    pub two_stage_lr: f64,
    /// Target steps when deploying a pretrained landscape model; `None` runs
    /// one θ-step, i.e. `theta_updates` steps.
    pub deploy_steps: Option<usize>,
}

impl Default for LancerConfig {
    fn default() -> Self {
        LancerConfig {
            outer_iters: 10,
            w_updates: 10,
            theta_updates: 10,
            lr_w: 1e-3,
            lr_theta: 1e-3,
            lambda: 0.0,
            n_perturb: 30,
            perturb_scale: 0.1,
            seed: 0,
            surrogate_hidden: vec![100, 100],
            target_hidden: Vec::new(),
            w_batch_size: None,
            buffer_capacity: None,
            two_stage_updates: 1000,
            two_stage_lr: 1e-2,
            deploy_steps: None,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be positive and finite, got {v}")))
    }
}

impl LancerConfig {
    /// Defaults for single-instance and amortized modes on fully observed
    /// families (`T = 40`, wider landscape model).
    pub fn zero_defaults() -> Self {
        LancerConfig {
            outer_iters: 40,
            surrogate_hidden: vec![200, 200],
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.w_updates == 0 || self.theta_updates == 0 {
            return Err(Error::invalid("inner update budgets must be at least 1"));
        }
        positive("lr_w", self.lr_w)?;
        positive("lr_theta", self.lr_theta)?;
        positive("perturb_scale", self.perturb_scale)?;
        positive("two_stage_lr", self.two_stage_lr)?;
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::invalid(format!("lambda must be non-negative, got {}", self.lambda)));
        }
        if self.surrogate_hidden.contains(&0) || self.target_hidden.contains(&0) {
            return Err(Error::invalid("hidden widths must be positive"));
        }
        if self.w_batch_size == Some(0) || self.buffer_capacity == Some(0) {
            return Err(Error::invalid("batch size and buffer capacity must be positive"));
        }
        Ok(())
    }

    pub fn deploy_steps(&self) -> usize {
        self.deploy_steps.unwrap_or(self.theta_updates)
    }
}
