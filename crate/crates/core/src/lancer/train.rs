use std::time::Instant;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::buffer::ReplayBuffer;
use super::config::LancerConfig;
use super::heuristics::heuristic_costs;
use super::surrogate::{ContextKind, SurrogateModel};
use crate::diffmodels::{layer_sizes, two_stage_fit, AdamState, DenseMatrix, FitOptions, MlpModel};
use crate::error::{Error, Result};
use crate::problems::{eval_objective, Dataset, Instance, ProblemDescriptor, ProblemFamily};
use crate::rng::{self, streams};
use crate::solvers::{solve_timed, Solution, SolverStats};

/// Target model `c_θ: y ↦ ĉ`.
pub type TargetModel = MlpModel;

/// One row of training history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryRow {
    pub iteration: usize,
    pub buffer_size: usize,
    /// Standardized landscape-model MSE after the w-step.
    pub surrogate_mse: f64,
    /// Mean loss (minimize convention) of the decisions evaluated in this
    /// iteration; for single-instance training, the best loss found so far.
    pub mean_decision_loss: f64,
    /// Cumulative training solver calls.
    pub solver_calls: u64,
    /// Seconds since training started.
    pub wall_time: f64,
}

/// Where the starting cost vector of single-instance training comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum ZeroInit {
    Heuristic,
    Random,
    Given(Vec<f64>),
}

/// Mutable state of an alternating run.
#[derive(Debug, Clone)]
pub struct LancerState {
    pub target: TargetModel,
    pub target_adam: AdamState,
    pub surrogate: SurrogateModel,
    pub surrogate_adam: AdamState,
    pub buffer: ReplayBuffer,
    pub stats: SolverStats,
    iteration: usize,
}

impl LancerState {
    pub fn new(target: TargetModel, surrogate: SurrogateModel, cfg: &LancerConfig) -> Self {
        let buffer = ReplayBuffer::new(surrogate.c_dim(), surrogate.context_dim(), cfg.buffer_capacity);
        LancerState {
            target_adam: AdamState::with_lr(target.param_count(), cfg.lr_theta),
            surrogate_adam: AdamState::with_lr(surrogate.param_count(), cfg.lr_w),
            target,
            surrogate,
            buffer,
            stats: SolverStats::new(),
            iteration: 0,
        }
    }

    /// Outer iterations completed.
    pub fn iteration(&self) -> usize {
        self.iteration
    }
}

/// Outcome of a multi-instance training run.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub target: TargetModel,
    pub surrogate: Option<SurrogateModel>,
    pub history: Vec<HistoryRow>,
    pub stats: SolverStats,
}

/// Outcome of single-instance training.
#[derive(Debug, Clone)]
pub struct ZeroOutcome {
    pub best_c: Vec<f64>,
    pub best_solution: Solution,
    /// True objective of `best_solution` in the family's natural sense.
    pub best_objective: f64,
    /// The first evaluated cost vector's objective.
    pub initial_objective: f64,
    pub final_c: Vec<f64>,
    pub surrogate: SurrogateModel,
    pub history: Vec<HistoryRow>,
    pub stats: SolverStats,
}

/// Outcome of pretraining a landscape model for reuse across instances.
#[derive(Debug, Clone)]
pub struct PretrainOutcome {
    pub surrogate: SurrogateModel,
    /// Best true objective found per training instance.
    pub best_objectives: Vec<f64>,
    pub history: Vec<HistoryRow>,
    pub stats: SolverStats,
}

/// Result of deploying a pretrained landscape model on a new instance.
#[derive(Debug, Clone)]
pub struct DeployOutcome {
    pub c: Vec<f64>,
    pub solution: Solution,
    pub objective: f64,
    pub stats: SolverStats,
}

fn context_of(kind: ContextKind, inst: &Instance) -> Vec<f64> {
    match kind {
        ContextKind::None => Vec::new(),
        ContextKind::Descriptor => inst.z.context_features(),
        ContextKind::Observed => inst.y.clone(),
    }
}

fn context_matrix(kind: ContextKind, dataset: &Dataset) -> Result<DenseMatrix> {
    let rows: Vec<Vec<f64>> = dataset.instances().iter().map(|i| context_of(kind, i)).collect();
    let width = rows.first().map_or(0, Vec::len);
    DenseMatrix::from_vec(rows.len(), width, rows.concat())
}

fn check_dataset(dataset: &Dataset, family: &ProblemFamily) -> Result<()> {
    if dataset.is_empty() {
        return Err(Error::invalid("dataset is empty"));
    }
    if dataset.family() != *family {
        return Err(Error::invalid(format!(
            "dataset holds {} ({:?}) instances, training asked for {} ({:?})",
            dataset.family().tag().name(),
            dataset.family().sense(),
            family.tag().name(),
            family.sense()
        )));
    }
    Ok(())
}

/// Solves every `(c, z)` pair (in parallel), records the calls in order
/// and returns each solution with its loss in the minimize convention.
fn evaluate_batch(
    family: &ProblemFamily,
    jobs: &[(&[f64], &ProblemDescriptor)],
    stats: &mut SolverStats,
) -> Result<Vec<(Solution, f64)>> {
    let results: Vec<_> = jobs
        .par_iter()
        .map(|(c, z)| {
            let (sol, elapsed) = solve_timed(family, c, z);
            let evaluated = sol.and_then(|s| eval_objective(family, &s, z).map(|f| (s, f)));
            (evaluated, elapsed)
        })
        .collect();
    let mut out = Vec::with_capacity(results.len());
    for (i, (evaluated, elapsed)) in results.into_iter().enumerate() {
        stats.record(elapsed);
        let (s, f) = evaluated.map_err(|e| Error::at(i, e))?;
        let loss = family.to_loss(f);
        if !loss.is_finite() {
            return Err(Error::at(i, Error::Numerical(format!("objective evaluated to {f}"))));
        }
        out.push((s, loss));
    }
    Ok(out)
}

fn fit_options(cfg: &LancerConfig, iteration: usize) -> FitOptions {
    FitOptions {
        n_updates: cfg.w_updates,
        batch_size: cfg.w_batch_size,
        seed: rng::derive(cfg.seed, iteration as u64),
    }
}

/// Solves each instance at the target's current prediction (one call per
/// instance), appends the evaluations to the replay buffer and refits the
/// landscape model on the whole buffer. Returns `(mean decision loss,
/// surrogate mse)`.
pub fn w_step(
    dataset: &Dataset,
    family: &ProblemFamily,
    state: &mut LancerState,
    cfg: &LancerConfig,
) -> Result<(f64, f64)> {
    check_dataset(dataset, family)?;
    let predictions = state.target.forward_batch(&dataset.feature_matrix()?)?.into_output();
    let jobs: Vec<(&[f64], &ProblemDescriptor)> = dataset
        .instances()
        .iter()
        .enumerate()
        .map(|(i, inst)| (predictions.row(i), &inst.z))
        .collect();
    let evaluated = evaluate_batch(family, &jobs, &mut state.stats)?;
    let kind = state.surrogate.context_kind();
    let mut total = 0.0;
    for (i, (_, loss)) in evaluated.iter().enumerate() {
        let inst = &dataset.instances()[i];
        state
            .buffer
            .push(predictions.row(i).to_vec(), context_of(kind, inst), *loss)?;
        total += loss;
    }
    state.iteration += 1;
    let mse = state
        .surrogate
        .fit(&state.buffer, &fit_options(cfg, state.iteration), &mut state.surrogate_adam)?;
    Ok((total / dataset.len() as f64, mse))
}

/// Prediction penalty data: weight and the regression targets (one row per
/// instance).
pub struct Penalty<'a> {
    pub lambda: f64,
    pub targets: &'a DenseMatrix,
}

/// Objective `J(θ) = mean_i M(c_θ(y_i), ctx_i) + λ·mean_i ‖c_θ(y_i) − z_i‖²`
/// (landscape in standardized units) and its gradient with respect to θ.
pub fn theta_objective_and_gradient(
    target: &TargetModel,
    surrogate: &SurrogateModel,
    features: &DenseMatrix,
    contexts: &DenseMatrix,
    penalty: Option<&Penalty<'_>>,
) -> Result<(f64, Vec<f64>)> {
    let n = features.rows();
    if n == 0 {
        return Err(Error::invalid("no instances for the target update"));
    }
    if target.output_dim() != surrogate.c_dim() {
        return Err(Error::dim(format!(
            "target emits {} costs, landscape model takes {}",
            target.output_dim(),
            surrogate.c_dim()
        )));
    }
    let trace = target.forward_batch(features)?;
    let c = trace.output();
    let inv_n = 1.0 / n as f64;
    let (values, mut dc) = surrogate.value_and_grad_batch(c, contexts, inv_n)?;
    let mut objective = values.iter().sum::<f64>() * inv_n;
    if let Some(p) = penalty {
        if p.lambda > 0.0 {
            if p.targets.rows() != n || p.targets.cols() != c.cols() {
                return Err(Error::dim("penalty targets do not match the predictions"));
            }
            let mut sq = 0.0;
            for ((d, pred), z) in dc
                .as_mut_slice()
                .iter_mut()
                .zip(c.as_slice())
                .zip(p.targets.as_slice())
            {
                let diff = pred - z;
                sq += diff * diff;
                *d += 2.0 * p.lambda * inv_n * diff;
            }
            objective += p.lambda * inv_n * sq;
        }
    }
    let (grad, _) = target.backward_batch(&trace, &dc, false)?;
    Ok((objective, grad))
}

/// Runs `cfg.theta_updates` Adam steps on the target against the frozen
/// landscape model. Makes no solver calls.
pub fn theta_step(
    dataset: &Dataset,
    state: &mut LancerState,
    cfg: &LancerConfig,
    penalty: Option<&Penalty<'_>>,
) -> Result<f64> {
    let features = dataset.feature_matrix()?;
    let contexts = context_matrix(state.surrogate.context_kind(), dataset)?;
    let mut last = f64::NAN;
    for _ in 0..cfg.theta_updates {
        let (j, grad) = theta_objective_and_gradient(&state.target, &state.surrogate, &features, &contexts, penalty)?;
        state.target_adam.step(state.target.params_mut(), &grad)?;
        last = j;
    }
    Ok(last)
}

fn new_target(dataset: &Dataset, cfg: &LancerConfig) -> Result<TargetModel> {
    let sizes = layer_sizes(dataset.feature_dim(), &cfg.target_hidden, dataset.surrogate_dim());
    MlpModel::glorot(&sizes, &mut rng::stream(cfg.seed, streams::TARGET_INIT))
}

fn new_surrogate(c_dim: usize, context_dim: usize, kind: ContextKind, cfg: &LancerConfig) -> Result<SurrogateModel> {
    SurrogateModel::new(
        c_dim,
        context_dim,
        kind,
        &cfg.surrogate_hidden,
        &mut rng::stream(cfg.seed, streams::SURROGATE_INIT),
    )
}

/// Two-stage baseline: regress `c_θ(y) ≈ z` and nothing else.
pub fn train_two_stage(dataset: &Dataset, family: &ProblemFamily, cfg: &LancerConfig) -> Result<TargetModel> {
    check_dataset(dataset, family)?;
    cfg.validate()?;
    let mut target = new_target(dataset, cfg)?;
    if cfg.two_stage_updates > 0 {
        let mut adam = AdamState::with_lr(target.param_count(), cfg.two_stage_lr);
        let opts = FitOptions {
            n_updates: cfg.two_stage_updates,
            batch_size: None,
            seed: rng::derive(cfg.seed, u64::MAX),
        };
        two_stage_fit(&mut target, dataset, &opts, &mut adam)?;
    }
    Ok(target)
}

fn history_row(state: &LancerState, loss: f64, mse: f64, start: Instant) -> HistoryRow {
    HistoryRow {
        iteration: state.iteration,
        buffer_size: state.buffer.len(),
        surrogate_mse: mse,
        mean_decision_loss: loss,
        solver_calls: state.stats.call_count(),
        wall_time: start.elapsed().as_secs_f64(),
    }
}

/// Called after every outer iteration with the history row and the current
/// target. An error aborts training.
pub type Observer<'a> = dyn FnMut(&HistoryRow, &TargetModel) -> Result<()> + 'a;

/// Predict-then-optimize training: two-stage warm start followed by
/// `cfg.outer_iters` alternations of [`w_step`] and [`theta_step`]. The
/// landscape model sees `(ĉ, z)`. Uses exactly `T·N` solver calls.
pub fn train_predict_optimize(dataset: &Dataset, family: &ProblemFamily, cfg: &LancerConfig) -> Result<TrainOutcome> {
    train_predict_optimize_with(dataset, family, cfg, &mut |_, _| Ok(()))
}

pub fn train_predict_optimize_with(
    dataset: &Dataset,
    family: &ProblemFamily,
    cfg: &LancerConfig,
    observer: &mut Observer<'_>,
) -> Result<TrainOutcome> {
    let start = Instant::now();
    let target = train_two_stage(dataset, family, cfg)?;
    let targets = dataset.cost_matrix()?;
    let ctx_dim = dataset.instances()[0].z.context_features().len();
    let surrogate = new_surrogate(dataset.surrogate_dim(), ctx_dim, ContextKind::Descriptor, cfg)?;
    let mut state = LancerState::new(target, surrogate, cfg);
    let penalty = Penalty {
        lambda: cfg.lambda,
        targets: &targets,
    };
    let mut history = Vec::with_capacity(cfg.outer_iters);
    for _ in 0..cfg.outer_iters {
        let (loss, mse) = w_step(dataset, family, &mut state, cfg)?;
        theta_step(dataset, &mut state, cfg, Some(&penalty))?;
        let row = history_row(&state, loss, mse, start);
        observer(&row, &state.target)?;
        history.push(row);
    }
    Ok(TrainOutcome {
        target: state.target,
        surrogate: (cfg.outer_iters > 0).then_some(state.surrogate),
        history,
        stats: state.stats,
    })
}

/// Amortized training on fully observed instances: random target
/// initialization, landscape model over `(ĉ, y)`, no prediction penalty.
/// Uses exactly `T·N` solver calls.
pub fn train_prior(dataset: &Dataset, family: &ProblemFamily, cfg: &LancerConfig) -> Result<TrainOutcome> {
    train_prior_with(dataset, family, cfg, &mut |_, _| Ok(()))
}

pub fn train_prior_with(
    dataset: &Dataset,
    family: &ProblemFamily,
    cfg: &LancerConfig,
    observer: &mut Observer<'_>,
) -> Result<TrainOutcome> {
    let start = Instant::now();
    check_dataset(dataset, family)?;
    cfg.validate()?;
    if cfg.outer_iters == 0 {
        return Err(Error::invalid("amortized training needs at least one outer iteration"));
    }
    let target = new_target(dataset, cfg)?;
    let surrogate = new_surrogate(dataset.surrogate_dim(), dataset.feature_dim(), ContextKind::Observed, cfg)?;
    let mut state = LancerState::new(target, surrogate, cfg);
    let mut history = Vec::with_capacity(cfg.outer_iters);
    for _ in 0..cfg.outer_iters {
        let (loss, mse) = w_step(dataset, family, &mut state, cfg)?;
        theta_step(dataset, &mut state, cfg, None)?;
        let row = history_row(&state, loss, mse, start);
        observer(&row, &state.target)?;
        history.push(row);
    }
    Ok(TrainOutcome {
        target: state.target,
        surrogate: Some(state.surrogate),
        history,
        stats: state.stats,
    })
}

fn initial_costs(family: &ProblemFamily, inst: &Instance, init: &ZeroInit, cfg: &LancerConfig) -> Result<Vec<f64>> {
    let m = inst.z.surrogate_dim();
    let c = match init {
        ZeroInit::Heuristic => heuristic_costs(family, &inst.z)?,
        ZeroInit::Random => {
            let mut r = rng::stream(cfg.seed, streams::TARGET_INIT);
            (0..m).map(|_| StandardNormal.sample(&mut r)).collect()
        }
        ZeroInit::Given(c) => c.clone(),
    };
    if c.len() != m {
        return Err(Error::dim(format!("initial cost vector has {} entries, expected {m}", c.len())));
    }
    Ok(c)
}

/// `c + scale·(1 + |c|) ⊙ ξ` with `ξ` standard normal.
fn perturb(c: &[f64], scale: f64, rng: &mut rng::Rng) -> Vec<f64> {
    c.iter()
        .map(|&v| {
            let xi: f64 = StandardNormal.sample(rng);
            v + scale * (1.0 + v.abs()) * xi
        })
        .collect()
}

/// Single-instance training: each outer iteration evaluates the current
/// cost vector and `n_perturb` perturbations of it, fits `M(ĉ)` on every
/// evaluation so far, then moves `c` by Adam on `M`. Returns the best
/// evaluated decision. Uses exactly `T·(n_perturb + 1)` solver calls.
pub fn train_zero(instance: &Instance, family: &ProblemFamily, cfg: &LancerConfig, init: &ZeroInit) -> Result<ZeroOutcome> {
    let start = Instant::now();
    cfg.validate()?;
    if family.tag() != instance.z.tag() {
        return Err(Error::invalid("family does not match the instance"));
    }
    if cfg.outer_iters == 0 {
        return Err(Error::invalid("single-instance training needs at least one outer iteration"));
    }
    let mut c = initial_costs(family, instance, init, cfg)?;
    let m = c.len();
    let mut surrogate = new_surrogate(m, 0, ContextKind::None, cfg)?;
    let mut surrogate_adam = AdamState::with_lr(surrogate.param_count(), cfg.lr_w);
    let mut c_adam = AdamState::with_lr(m, cfg.lr_theta);
    let mut buffer = ReplayBuffer::new(m, 0, cfg.buffer_capacity);
    let mut stats = SolverStats::new();
    let mut perturb_rng = rng::stream(cfg.seed, streams::PERTURB);
    let mut best: Option<(f64, Vec<f64>, Solution)> = None;
    let mut initial_loss = f64::NAN;
    let mut history = Vec::with_capacity(cfg.outer_iters);

    for t in 1..=cfg.outer_iters {
        let mut candidates = Vec::with_capacity(cfg.n_perturb + 1);
        candidates.push(c.clone());
        for _ in 0..cfg.n_perturb {
            candidates.push(perturb(&c, cfg.perturb_scale, &mut perturb_rng));
        }
        let jobs: Vec<(&[f64], &ProblemDescriptor)> = candidates.iter().map(|c| (c.as_slice(), &instance.z)).collect();
        let evaluated = evaluate_batch(family, &jobs, &mut stats)?;
        if t == 1 {
            initial_loss = evaluated[0].1;
        }
        for (cand, (sol, loss)) in candidates.into_iter().zip(evaluated) {
            if best.as_ref().is_none_or(|(b, _, _)| loss < *b) {
                best = Some((loss, cand.clone(), sol));
            }
            buffer.push(cand, Vec::new(), loss)?;
        }
        let mse = surrogate.fit(&buffer, &fit_options(cfg, t), &mut surrogate_adam)?;
        for _ in 0..cfg.theta_updates {
            let g = surrogate.grad_c(&c, &[])?;
            c_adam.step(&mut c, &g)?;
        }
        history.push(HistoryRow {
            iteration: t,
            buffer_size: buffer.len(),
            surrogate_mse: mse,
            mean_decision_loss: best.as_ref().map_or(f64::NAN, |b| b.0),
            solver_calls: stats.call_count(),
            wall_time: start.elapsed().as_secs_f64(),
        });
    }
    let (best_loss, best_c, best_solution) = best.expect("at least one evaluation");
    Ok(ZeroOutcome {
        best_c,
        best_solution,
        best_objective: family.from_loss(best_loss),
        initial_objective: family.from_loss(initial_loss),
        final_c: c,
        surrogate,
        history,
        stats,
    })
}

/// Runs single-instance training on every instance at once with one shared
/// landscape model `M(ĉ, y)`, producing a model that can be deployed on new
/// instances without further solver calls. Uses exactly
/// `T·N·(n_perturb + 1)` solver calls.
pub fn pretrain_landscape(dataset: &Dataset, family: &ProblemFamily, cfg: &LancerConfig) -> Result<PretrainOutcome> {
    let start = Instant::now();
    check_dataset(dataset, family)?;
    cfg.validate()?;
    if cfg.outer_iters == 0 {
        return Err(Error::invalid("pretraining needs at least one outer iteration"));
    }
    let n = dataset.len();
    let m = dataset.surrogate_dim();
    let feat = dataset.feature_dim();
    let mut costs = DenseMatrix::zeros(n, m);
    for (i, inst) in dataset.instances().iter().enumerate() {
        costs.row_mut(i).copy_from_slice(&initial_costs(family, inst, &ZeroInit::Heuristic, cfg)?);
    }
    let contexts = context_matrix(ContextKind::Observed, dataset)?;
    let mut surrogate = new_surrogate(m, feat, ContextKind::Observed, cfg)?;
    let mut surrogate_adam = AdamState::with_lr(surrogate.param_count(), cfg.lr_w);
    let mut c_adam = AdamState::with_lr(n * m, cfg.lr_theta);
    let mut buffer = ReplayBuffer::new(m, feat, cfg.buffer_capacity);
    let mut stats = SolverStats::new();
    let mut perturb_rng = rng::stream(cfg.seed, streams::PERTURB);
    let mut best = vec![f64::INFINITY; n];
    let mut history = Vec::with_capacity(cfg.outer_iters);

    for t in 1..=cfg.outer_iters {
        let mut candidates = Vec::with_capacity(n * (cfg.n_perturb + 1));
        for i in 0..n {
            let c = costs.row(i);
            candidates.push((i, c.to_vec()));
            for _ in 0..cfg.n_perturb {
                candidates.push((i, perturb(c, cfg.perturb_scale, &mut perturb_rng)));
            }
        }
        let jobs: Vec<(&[f64], &ProblemDescriptor)> = candidates
            .iter()
            .map(|(i, c)| (c.as_slice(), &dataset.instances()[*i].z))
            .collect();
        let evaluated = evaluate_batch(family, &jobs, &mut stats)?;
        let mut total = 0.0;
        for ((i, cand), (_, loss)) in candidates.into_iter().zip(evaluated) {
            best[i] = best[i].min(loss);
            total += loss;
            buffer.push(cand, dataset.instances()[i].y.clone(), loss)?;
        }
        let mse = surrogate.fit(&buffer, &fit_options(cfg, t), &mut surrogate_adam)?;
        for _ in 0..cfg.theta_updates {
            let (_, dc) = surrogate.value_and_grad_batch(&costs, &contexts, 1.0)?;
            c_adam.step(costs.as_mut_slice(), dc.as_slice())?;
        }
        history.push(HistoryRow {
            iteration: t,
            buffer_size: buffer.len(),
            surrogate_mse: mse,
            mean_decision_loss: total / (n * (cfg.n_perturb + 1)) as f64,
            solver_calls: stats.call_count(),
            wall_time: start.elapsed().as_secs_f64(),
        });
    }
    Ok(PretrainOutcome {
        surrogate,
        best_objectives: best.into_iter().map(|l| family.from_loss(l)).collect(),
        history,
        stats,
    })
}

/// Optimizes `c` for a new instance against a frozen landscape model
/// `M(ĉ, y)` and solves once. Exactly one solver call.
pub fn deploy_reused_m(
    instance: &Instance,
    family: &ProblemFamily,
    surrogate: &SurrogateModel,
    cfg: &LancerConfig,
    init: &ZeroInit,
) -> Result<DeployOutcome> {
    cfg.validate()?;
    if surrogate.context_kind() != ContextKind::Observed {
        return Err(Error::invalid("reuse needs a landscape model trained on observed features"));
    }
    if surrogate.context_dim() != instance.y.len() {
        return Err(Error::dim(format!(
            "landscape model expects {} features, instance has {}",
            surrogate.context_dim(),
            instance.y.len()
        )));
    }
    let mut c = initial_costs(family, instance, init, cfg)?;
    if c.len() != surrogate.c_dim() {
        return Err(Error::dim("instance cost dimension differs from the landscape model"));
    }
    let mut adam = AdamState::with_lr(c.len(), cfg.lr_theta);
    for _ in 0..cfg.deploy_steps() {
        let g = surrogate.grad_c(&c, &instance.y)?;
        adam.step(&mut c, &g)?;
    }
    let mut stats = SolverStats::new();
    let mut evaluated = evaluate_batch(family, &[(c.as_slice(), &instance.z)], &mut stats)?;
    let (solution, loss) = evaluated.pop().expect("one job");
    Ok(DeployOutcome {
        c,
        solution,
        objective: family.from_loss(loss),
        stats,
    })
}

/// `x = g(c_θ(y))` and its true objective under `z`.
pub fn predict_solve(
    target: &TargetModel,
    y: &[f64],
    family: &ProblemFamily,
    z: &ProblemDescriptor,
    stats: &mut SolverStats,
) -> Result<(Solution, f64)> {
    let c = target.forward(y)?;
    let solution = crate::solvers::solve_family(family, &c, z, stats)?;
    let objective = eval_objective(family, &solution, z)?;
    Ok((solution, objective))
}
