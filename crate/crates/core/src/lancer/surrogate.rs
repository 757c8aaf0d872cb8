use serde::{Deserialize, Serialize};

use super::buffer::ReplayBuffer;
use crate::diffmodels::{fit_mse, layer_sizes, AdamState, DenseMatrix, FitOptions, MlpModel};
use crate::error::{Error, Result};

/// What the landscape model sees besides the surrogate cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContextKind {
    /// `M(ĉ)` for a single instance.
    None,
    /// `M(ĉ, z)` with the flattened problem description.
    Descriptor,
    /// `M(ĉ, y)` with the observed features.
    Observed,
}

const STD_FLOOR: f64 = 1e-12;

/// Landscape model `M_w(ĉ, context) ≈ f̂`.
///
/// Inputs and targets are standardized with statistics of the replay buffer
/// refreshed at every fit. [`value`](Self::value) and the gradients work in
/// standardized output units, so the minimizer of the landscape does not
/// depend on the scale of the recorded losses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SurrogateRepr", into = "SurrogateRepr")]
pub struct SurrogateModel {
    net: MlpModel,
    context: ContextKind,
    c_dim: usize,
    input_mean: Vec<f64>,
    input_std: Vec<f64>,
    target_mean: f64,
    target_std: f64,
}

#[derive(Serialize, Deserialize)]
struct SurrogateRepr {
    net: MlpModel,
    context: ContextKind,
    c_dim: usize,
    input_mean: Vec<f64>,
    input_std: Vec<f64>,
    target_mean: f64,
    target_std: f64,
}

impl TryFrom<SurrogateRepr> for SurrogateModel {
    type Error = Error;
    fn try_from(r: SurrogateRepr) -> Result<Self> {
        let width = r.net.input_dim();
        if r.net.output_dim() != 1 {
            return Err(Error::Format("landscape model must have a scalar output".into()));
        }
        if r.c_dim == 0 || r.c_dim > width || (r.context == ContextKind::None && r.c_dim != width) {
            return Err(Error::Format(format!("cost width {} inconsistent with input width {width}", r.c_dim)));
        }
        if r.input_mean.len() != width || r.input_std.len() != width {
            return Err(Error::Format("standardization vectors do not match the input width".into()));
        }
        let finite = r.input_mean.iter().all(|v| v.is_finite())
            && r.input_std.iter().all(|v| v.is_finite() && *v > 0.0)
            && r.target_mean.is_finite()
            && r.target_std.is_finite()
            && r.target_std > 0.0;
        if !finite {
            return Err(Error::Format("standardization statistics must be finite and positive".into()));
        }
        Ok(SurrogateModel {
            net: r.net,
            context: r.context,
            c_dim: r.c_dim,
            input_mean: r.input_mean,
            input_std: r.input_std,
            target_mean: r.target_mean,
            target_std: r.target_std,
        })
    }
}

impl From<SurrogateModel> for SurrogateRepr {
    fn from(m: SurrogateModel) -> Self {
        SurrogateRepr {
            net: m.net,
            context: m.context,
            c_dim: m.c_dim,
            input_mean: m.input_mean,
            input_std: m.input_std,
            target_mean: m.target_mean,
            target_std: m.target_std,
        }
    }
}

fn mean_std(values: impl Iterator<Item = f64> + Clone, n: usize) -> (f64, f64) {
    let mean = values.clone().sum::<f64>() / n as f64;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    let std = var.sqrt();
    (mean, if std > STD_FLOOR { std } else { 1.0 })
}

impl SurrogateModel {
    pub fn new(
        c_dim: usize,
        context_dim: usize,
        context: ContextKind,
        hidden: &[usize],
        rng: &mut impl rand::Rng,
    ) -> Result<Self> {
        if c_dim == 0 {
            return Err(Error::invalid("surrogate cost dimension must be positive"));
        }
        if context == ContextKind::None && context_dim != 0 {
            return Err(Error::invalid("a context-free landscape model takes no context"));
        }
        let width = c_dim + context_dim;
        let net = MlpModel::glorot(&layer_sizes(width, hidden, 1), rng)?;
        Ok(SurrogateModel {
            net,
            context,
            c_dim,
            input_mean: vec![0.0; width],
            input_std: vec![1.0; width],
            target_mean: 0.0,
            target_std: 1.0,
        })
    }

    pub fn net(&self) -> &MlpModel {
        &self.net
    }

    pub fn context_kind(&self) -> ContextKind {
        self.context
    }

    pub fn c_dim(&self) -> usize {
        self.c_dim
    }

    pub fn context_dim(&self) -> usize {
        self.net.input_dim() - self.c_dim
    }

    pub fn target_mean(&self) -> f64 {
        self.target_mean
    }

    pub fn target_std(&self) -> f64 {
        self.target_std
    }

    pub fn param_count(&self) -> usize {
        self.net.param_count()
    }

    fn standardized_input(&self, c: &[f64], context: &[f64], out: &mut [f64]) {
        for (j, v) in c.iter().chain(context).enumerate() {
            out[j] = (v - self.input_mean[j]) / self.input_std[j];
        }
    }

    fn check_row(&self, c: &[f64], context: &[f64]) -> Result<()> {
        if c.len() != self.c_dim || context.len() != self.context_dim() {
            return Err(Error::dim(format!(
                "landscape model expects ({}, {}) inputs, got ({}, {})",
                self.c_dim,
                self.context_dim(),
                c.len(),
                context.len()
            )));
        }
        Ok(())
    }

    /// Refreshes the standardization from `buffer` and runs the configured
    /// number of MSE updates on the whole buffer. Returns the standardized
    /// mean squared error after fitting.
    pub fn fit(&mut self, buffer: &ReplayBuffer, opts: &FitOptions, state: &mut AdamState) -> Result<f64> {
        if buffer.c_dim() != self.c_dim || buffer.context_dim() != self.context_dim() {
            return Err(Error::dim("replay buffer layout does not match the landscape model"));
        }
        let n = buffer.len();
        if n == 0 {
            return Err(Error::invalid("cannot fit the landscape model on an empty buffer"));
        }
        let width = self.net.input_dim();
        let mut inputs = DenseMatrix::zeros(n, width);
        for (r, e) in buffer.iter().enumerate() {
            let row = inputs.row_mut(r);
            row[..self.c_dim].copy_from_slice(&e.c);
            row[self.c_dim..].copy_from_slice(&e.context);
        }
        for j in 0..width {
            let (m, s) = mean_std((0..n).map(|r| inputs.get(r, j)), n);
            self.input_mean[j] = m;
            self.input_std[j] = s;
        }
        for r in 0..n {
            for (j, v) in inputs.row_mut(r).iter_mut().enumerate() {
                *v = (*v - self.input_mean[j]) / self.input_std[j];
            }
        }
        let (m, s) = mean_std(buffer.iter().map(|e| e.loss), n);
        self.target_mean = m;
        self.target_std = s;
        let targets = DenseMatrix::from_vec(
            n,
            1,
            buffer.iter().map(|e| (e.loss - self.target_mean) / self.target_std).collect(),
        )?;
        fit_mse(&mut self.net, &inputs, &targets, opts, state)
    }

    /// Standardized landscape value at one point.
    pub fn value(&self, c: &[f64], context: &[f64]) -> Result<f64> {
        self.check_row(c, context)?;
        let mut x = vec![0.0; self.net.input_dim()];
        self.standardized_input(c, context, &mut x);
        Ok(self.net.forward(&x)?[0])
    }

    /// Predicted loss in the units of the recorded `f̂`.
    pub fn predict_loss(&self, c: &[f64], context: &[f64]) -> Result<f64> {
        Ok(self.target_mean + self.target_std * self.value(c, context)?)
    }

    /// Gradient of the standardized value with respect to `c`.
    pub fn grad_c(&self, c: &[f64], context: &[f64]) -> Result<Vec<f64>> {
        self.check_row(c, context)?;
        let mut x = vec![0.0; self.net.input_dim()];
        self.standardized_input(c, context, &mut x);
        let g = self.net.grad_input(&x, &[1.0])?;
        Ok((0..self.c_dim).map(|j| g[j] / self.input_std[j]).collect())
    }

    /// Values at every row of `(c, context)` and the gradient of
    /// `Σ_r weight_r · value_r` with respect to each row of `c`.
    pub fn value_and_grad_batch(
        &self,
        c: &DenseMatrix,
        context: &DenseMatrix,
        weight: f64,
    ) -> Result<(Vec<f64>, DenseMatrix)> {
        let n = c.rows();
        if context.rows() != n || c.cols() != self.c_dim || context.cols() != self.context_dim() {
            return Err(Error::dim(format!(
                "landscape batch {}x{} + {}x{} for widths ({}, {})",
                c.rows(),
                c.cols(),
                context.rows(),
                context.cols(),
                self.c_dim,
                self.context_dim()
            )));
        }
        let width = self.net.input_dim();
        let mut x = DenseMatrix::zeros(n, width);
        for r in 0..n {
            self.standardized_input(c.row(r), context.row(r), x.row_mut(r));
        }
        let trace = self.net.forward_batch(&x)?;
        let values = trace.output().as_slice().to_vec();
        let upstream = DenseMatrix::from_vec(n, 1, vec![weight; n])?;
        let (_, dx) = self.net.backward_batch(&trace, &upstream, true)?;
        let dx = dx.expect("input gradient requested");
        let mut dc = DenseMatrix::zeros(n, self.c_dim);
        for r in 0..n {
            for j in 0..self.c_dim {
                dc.set(r, j, dx.get(r, j) / self.input_std[j]);
            }
        }
        Ok((values, dc))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn model() -> SurrogateModel {
        SurrogateModel::new(3, 2, ContextKind::Observed, &[6], &mut rng::stream(1, 0)).unwrap()
    }

    #[test]
    fn grad_c_matches_finite_differences() {
        let m = model();
        let c = [0.3, -0.2, 0.9];
        let ctx = [1.0, 0.5];
        let g = m.grad_c(&c, &ctx).unwrap();
        for j in 0..3 {
            let h = 1e-6;
            let (mut p, mut q) = (c, c);
            p[j] += h;
            q[j] -= h;
            let fd = (m.value(&p, &ctx).unwrap() - m.value(&q, &ctx).unwrap()) / (2.0 * h);
            assert!((fd - g[j]).abs() <= 1e-6 * (1.0 + fd.abs()), "{fd} vs {}", g[j]);
        }
    }

    #[test]
    fn batch_matches_single_rows() {
        let m = model();
        let c = DenseMatrix::from_rows(&[vec![0.1, 0.2, 0.3], vec![-1.0, 0.0, 2.0]]).unwrap();
        let ctx = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![3.0, -1.0]]).unwrap();
        let (vals, dc) = m.value_and_grad_batch(&c, &ctx, 1.0).unwrap();
        for r in 0..2 {
            assert!((vals[r] - m.value(c.row(r), ctx.row(r)).unwrap()).abs() < 1e-14);
            let g = m.grad_c(c.row(r), ctx.row(r)).unwrap();
            for j in 0..3 {
                assert!((dc.get(r, j) - g[j]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn fit_standardizes_targets() {
        let mut m = SurrogateModel::new(1, 0, ContextKind::None, &[4], &mut rng::stream(2, 0)).unwrap();
        let mut b = ReplayBuffer::new(1, 0, None);
        for i in 0..10 {
            let x = i as f64 / 10.0;
            b.push(vec![x], vec![], 100.0 + 5.0 * x).unwrap();
        }
        let mut adam = AdamState::with_lr(m.param_count(), 1e-2);
        let loss = m.fit(&b, &FitOptions::new(500, 0), &mut adam).unwrap();
        assert!(loss < 0.05, "{loss}");
        assert!((m.target_mean() - 102.25).abs() < 1e-12);
        let pred = m.predict_loss(&[0.5], &[]).unwrap();
        assert!((pred - 102.5).abs() < 0.5, "{pred}");
    }

    #[test]
    fn serde_round_trip_validates() {
        let m = model();
        let text = serde_json::to_string(&m).unwrap();
        let back: SurrogateModel = serde_json::from_str(&text).unwrap();
        assert_eq!(m, back);
        let broken = text.replace("\"c_dim\":3", "\"c_dim\":9");
        assert!(serde_json::from_str::<SurrogateModel>(&broken).is_err());
    }
}
