use rand::seq::SliceRandom;

use super::{AdamState, DenseMatrix, MlpModel};
use crate::error::{Error, Result};
use crate::problems::Dataset;
use crate::rng;

/// Samples per update when no batch size is given and the data is larger.
pub const DEFAULT_MAX_FULL_BATCH: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub n_updates: usize,
    /// `None`: full batch up to [`DEFAULT_MAX_FULL_BATCH`] samples.
    pub batch_size: Option<usize>,
    pub seed: u64,
}

impl FitOptions {
    pub fn new(n_updates: usize, seed: u64) -> Self {
        FitOptions {
            n_updates,
            batch_size: None,
            seed,
        }
    }
}

/// Mean squared error over all rows and output columns.
pub fn mse(model: &MlpModel, inputs: &DenseMatrix, targets: &DenseMatrix) -> Result<f64> {
    let out = model.forward_batch(inputs)?.into_output();
    check_targets(&out, targets)?;
    let n = out.as_slice().len().max(1) as f64;
    Ok(out
        .as_slice()
        .iter()
        .zip(targets.as_slice())
        .map(|(p, t)| (p - t) * (p - t))
        .sum::<f64>()
        / n)
}

fn check_targets(out: &DenseMatrix, targets: &DenseMatrix) -> Result<()> {
    if out.rows() != targets.rows() || out.cols() != targets.cols() {
        return Err(Error::dim(format!(
            "predictions {}x{} vs targets {}x{}",
            out.rows(),
            out.cols(),
            targets.rows(),
            targets.cols()
        )));
    }
    Ok(())
}

fn gather(m: &DenseMatrix, idx: &[usize]) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(idx.len(), m.cols());
    for (r, &i) in idx.iter().enumerate() {
        out.row_mut(r).copy_from_slice(m.row(i));
    }
    out
}

/// Runs exactly `opts.n_updates` Adam steps on the mean squared error and
/// returns the mean loss over the whole data set afterwards.
pub fn fit_mse(
    model: &mut MlpModel,
    inputs: &DenseMatrix,
    targets: &DenseMatrix,
    opts: &FitOptions,
    state: &mut AdamState,
) -> Result<f64> {
    let n = inputs.rows();
    if n == 0 {
        return Err(Error::invalid("cannot fit on an empty data set"));
    }
    if targets.rows() != n {
        return Err(Error::dim("inputs and targets differ in sample count"));
    }
    if opts.n_updates == 0 {
        return Err(Error::invalid("n_updates must be at least 1"));
    }
    let batch = opts
        .batch_size
        .unwrap_or(DEFAULT_MAX_FULL_BATCH)
        .clamp(1, n);
    let mut order: Vec<usize> = (0..n).collect();
    let mut cursor = n;
    let mut rng = rng::stream(opts.seed, rng::streams::MINIBATCH);

    for _ in 0..opts.n_updates {
        let (x, y);
        let (xb, yb) = if batch == n {
            (inputs, targets)
        } else {
            if cursor + batch > n {
                order.shuffle(&mut rng);
                cursor = 0;
            }
            let idx = &order[cursor..cursor + batch];
            cursor += batch;
            x = gather(inputs, idx);
            y = gather(targets, idx);
            (&x, &y)
        };
        let trace = model.forward_batch(xb)?;
        let out = trace.output();
        check_targets(out, yb)?;
        let scale = 2.0 / (out.as_slice().len() as f64);
        let mut upstream = DenseMatrix::zeros(out.rows(), out.cols());
        for ((u, p), t) in upstream
            .as_mut_slice()
            .iter_mut()
            .zip(out.as_slice())
            .zip(yb.as_slice())
        {
            *u = scale * (p - t);
        }
        let (grad, _) = model.backward_batch(&trace, &upstream, false)?;
        state.step(model.params_mut(), &grad)?;
    }
    mse(model, inputs, targets)
}

/// Regresses the target mapping onto the ground-truth cost vectors,
/// `c(y_i) ≈ z_i`. This is both the warm start of predict-then-optimize
/// training and the standalone two-stage baseline.
pub fn two_stage_fit(
    target: &mut MlpModel,
    dataset: &Dataset,
    opts: &FitOptions,
    state: &mut AdamState,
) -> Result<f64> {
    let inputs = dataset.feature_matrix()?;
    let targets = dataset.cost_matrix()?;
    fit_mse(target, &inputs, &targets, opts, state)
}
