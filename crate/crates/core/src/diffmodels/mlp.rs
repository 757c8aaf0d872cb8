use serde::{Deserialize, Serialize};

use super::matrix::{gemm, DenseMatrix};
use crate::error::{Error, Result};

/// Fully connected network: tanh on hidden layers, identity on the output.
///
/// Parameters live in one flat vector. For each layer, the `out × in` weight
/// block (row-major) is followed by the `out` biases. Gradients use exactly
/// the same layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MlpRepr", into = "MlpRepr")]
pub struct MlpModel {
    layer_sizes: Vec<usize>,
    params: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct MlpRepr {
    layer_sizes: Vec<usize>,
    params: Vec<f64>,
}

impl TryFrom<MlpRepr> for MlpModel {
    type Error = Error;
    fn try_from(r: MlpRepr) -> Result<Self> {
        MlpModel::from_parts(r.layer_sizes, r.params)
    }
}

impl From<MlpModel> for MlpRepr {
    fn from(m: MlpModel) -> Self {
        MlpRepr {
            layer_sizes: m.layer_sizes,
            params: m.params,
        }
    }
}

/// Activations recorded by [`MlpModel::forward_batch`], one matrix per layer
/// boundary (input first, network output last).
#[derive(Debug, Clone)]
pub struct BatchTrace {
    activations: Vec<DenseMatrix>,
}

impl BatchTrace {
    pub fn output(&self) -> &DenseMatrix {
        self.activations.last().expect("trace holds the input at least")
    }

    pub fn into_output(mut self) -> DenseMatrix {
        self.activations.pop().expect("trace holds the input at least")
    }
}

fn param_count_for(sizes: &[usize]) -> Option<usize> {
    sizes.windows(2).try_fold(0usize, |acc, w| {
        w[0].checked_mul(w[1])
            .and_then(|p| p.checked_add(w[1]))
            .and_then(|p| acc.checked_add(p))
    })
}

impl MlpModel {
    fn check_sizes(sizes: &[usize]) -> Result<usize> {
        if sizes.len() < 2 {
            return Err(Error::invalid("an MLP needs at least input and output sizes"));
        }
        if sizes.contains(&0) {
            return Err(Error::invalid("layer sizes must be positive"));
        }
        param_count_for(sizes).ok_or_else(|| Error::invalid("parameter count overflows"))
    }

    /// All weights and biases zero.
    pub fn zeros(layer_sizes: &[usize]) -> Result<Self> {
        let n = Self::check_sizes(layer_sizes)?;
        Ok(MlpModel {
            layer_sizes: layer_sizes.to_vec(),
            params: vec![0.0; n],
        })
    }

    /// Glorot-uniform weights, zero biases.
    pub fn glorot(layer_sizes: &[usize], rng: &mut impl rand::Rng) -> Result<Self> {
        let mut model = Self::zeros(layer_sizes)?;
        let mut offset = 0;
        for w in layer_sizes.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for p in &mut model.params[offset..offset + fan_in * fan_out] {
                *p = rng.random_range(-limit..limit);
            }
            offset += fan_in * fan_out + fan_out;
        }
        Ok(model)
    }

    pub fn from_parts(layer_sizes: Vec<usize>, params: Vec<f64>) -> Result<Self> {
        let n = Self::check_sizes(&layer_sizes)?;
        if params.len() != n {
            return Err(Error::dim(format!(
                "layer sizes {:?} need {} parameters, got {}",
                layer_sizes,
                n,
                params.len()
            )));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid("parameters must be finite"));
        }
        Ok(MlpModel {
            layer_sizes,
            params,
        })
    }

    /// Zero-hidden-layer model `x ↦ W x + b`.
    pub fn linear(weight: &DenseMatrix, bias: &[f64]) -> Result<Self> {
        if bias.len() != weight.rows() {
            return Err(Error::dim("bias length must equal weight rows"));
        }
        let mut params = weight.as_slice().to_vec();
        params.extend_from_slice(bias);
        Self::from_parts(vec![weight.cols(), weight.rows()], params)
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    pub fn num_layers(&self) -> usize {
        self.layer_sizes.len() - 1
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn layer_offsets(&self, layer: usize) -> (usize, usize, usize, usize) {
        let mut offset = 0;
        for w in self.layer_sizes.windows(2).take(layer) {
            offset += w[0] * w[1] + w[1];
        }
        let (fan_in, fan_out) = (self.layer_sizes[layer], self.layer_sizes[layer + 1]);
        (offset, offset + fan_in * fan_out, fan_in, fan_out)
    }

    /// Weight block of `layer` (row-major, `out × in`).
    pub fn weight(&self, layer: usize) -> &[f64] {
        let (w, b, _, _) = self.layer_offsets(layer);
        &self.params[w..b]
    }

    pub fn bias(&self, layer: usize) -> &[f64] {
        let (_, b, _, out) = self.layer_offsets(layer);
        &self.params[b..b + out]
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        let x = DenseMatrix::from_vec(1, input.len(), input.to_vec())?;
        Ok(self.forward_batch(&x)?.into_output().into_vec())
    }

    /// Gradient of `upstreamᵀ · forward(input)` with respect to every parameter.
    pub fn grad_params(&self, input: &[f64], upstream: &[f64]) -> Result<Vec<f64>> {
        Ok(self.backward(input, upstream)?.0)
    }

    /// Gradient of `upstreamᵀ · forward(input)` with respect to the input.
    pub fn grad_input(&self, input: &[f64], upstream: &[f64]) -> Result<Vec<f64>> {
        Ok(self.backward(input, upstream)?.1)
    }

    /// Both gradients from a single reverse pass.
    pub fn backward(&self, input: &[f64], upstream: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let x = DenseMatrix::from_vec(1, input.len(), input.to_vec())?;
        let trace = self.forward_batch(&x)?;
        let up = DenseMatrix::from_vec(1, upstream.len(), upstream.to_vec())?;
        let (gp, gi) = self.backward_batch(&trace, &up, true)?;
        Ok((gp, gi.expect("input gradient requested").into_vec()))
    }

    /// Forward pass over a batch (one sample per row).
    pub fn forward_batch(&self, inputs: &DenseMatrix) -> Result<BatchTrace> {
        if inputs.cols() != self.input_dim() {
            return Err(Error::dim(format!(
                "model expects input width {}, got {}",
                self.input_dim(),
                inputs.cols()
            )));
        }
        let batch = inputs.rows();
        let mut activations = Vec::with_capacity(self.layer_sizes.len());
        activations.push(inputs.clone());
        for layer in 0..self.num_layers() {
            let (w, b, fan_in, fan_out) = self.layer_offsets(layer);
            let prev = activations.last().unwrap();
            let mut z = DenseMatrix::zeros(batch, fan_out);
            gemm(
                batch,
                fan_in,
                fan_out,
                1.0,
                prev.as_slice(),
                false,
                &self.params[w..b],
                true,
                0.0,
                z.as_mut_slice(),
            );
            let bias = &self.params[b..b + fan_out];
            let hidden = layer + 1 < self.num_layers();
            for r in 0..batch {
                for (v, bj) in z.row_mut(r).iter_mut().zip(bias) {
                    *v += bj;
                    if hidden {
                        *v = v.tanh();
                    }
                }
            }
            activations.push(z);
        }
        Ok(BatchTrace { activations })
    }

    /// Reverse pass. Returns the parameter gradient of
    /// `Σ_rows upstream_rowᵀ · output_row` and, if asked, the per-row input
    /// gradient.
    pub fn backward_batch(
        &self,
        trace: &BatchTrace,
        upstream: &DenseMatrix,
        want_input_grad: bool,
    ) -> Result<(Vec<f64>, Option<DenseMatrix>)> {
        let out = trace.output();
        if upstream.rows() != out.rows() || upstream.cols() != out.cols() {
            return Err(Error::dim(format!(
                "upstream is {}x{}, output is {}x{}",
                upstream.rows(),
                upstream.cols(),
                out.rows(),
                out.cols()
            )));
        }
        let batch = out.rows();
        let mut grad = vec![0.0; self.param_count()];
        let mut delta = upstream.clone();
        for layer in (0..self.num_layers()).rev() {
            let (w, b, fan_in, fan_out) = self.layer_offsets(layer);
            let input = &trace.activations[layer];
            gemm(
                fan_out,
                batch,
                fan_in,
                1.0,
                delta.as_slice(),
                true,
                input.as_slice(),
                false,
                0.0,
                &mut grad[w..b],
            );
            let gb = &mut grad[b..b + fan_out];
            for r in 0..batch {
                for (g, d) in gb.iter_mut().zip(delta.row(r)) {
                    *g += d;
                }
            }
            if layer == 0 && !want_input_grad {
                break;
            }
            let mut prev = DenseMatrix::zeros(batch, fan_in);
            gemm(
                batch,
                fan_out,
                fan_in,
                1.0,
                delta.as_slice(),
                false,
                &self.params[w..b],
                false,
                0.0,
                prev.as_mut_slice(),
            );
            if layer > 0 {
                // previous activation is tanh output a; da/dz = 1 - a²
                for (d, a) in prev.as_mut_slice().iter_mut().zip(input.as_slice()) {
                    *d *= 1.0 - a * a;
                }
            }
            delta = prev;
        }
        Ok((grad, want_input_grad.then_some(delta)))
    }
}

/// Builds `[input, hidden..., output]`.
pub fn layer_sizes(input: usize, hidden: &[usize], output: usize) -> Vec<usize> {
    let mut sizes = Vec::with_capacity(hidden.len() + 2);
    sizes.push(input);
    sizes.extend_from_slice(hidden);
    sizes.push(output);
    sizes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn zero_model_outputs_zero() {
        let m = MlpModel::zeros(&[3, 4, 2]).unwrap();
        assert_eq!(m.forward(&[1.0, -2.0, 3.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn linear_model_is_affine() {
        let w = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![-1.0, 0.5], vec![0.0, 3.0]]).unwrap();
        let m = MlpModel::linear(&w, &[0.1, 0.2, 0.3]).unwrap();
        let y = m.forward(&[2.0, -1.0]).unwrap();
        assert_eq!(y, vec![0.1, -2.5 + 0.2, -3.0 + 0.3]);

        let up = [1.0, -2.0, 0.5];
        let gi = m.grad_input(&[2.0, -1.0], &up).unwrap();
        assert_eq!(gi, w.tr_matvec(&up).unwrap());
        let gp = m.grad_params(&[2.0, -1.0], &up).unwrap();
        // d/dW_ij = upstream_i * input_j, d/db_i = upstream_i
        assert_eq!(&gp[..6], &[2.0, -1.0, -4.0, 2.0, 1.0, -0.5]);
        assert_eq!(&gp[6..], &up);
    }

    #[test]
    fn zero_upstream_gives_zero_gradient() {
        let m = MlpModel::glorot(&[4, 6, 3], &mut rng::stream(1, 0)).unwrap();
        let (gp, gi) = m.backward(&[0.3, -0.2, 1.0, 0.0], &[0.0; 3]).unwrap();
        assert!(gp.iter().chain(&gi).all(|&g| g == 0.0));
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let m = MlpModel::zeros(&[3, 2]).unwrap();
        assert!(matches!(m.forward(&[1.0]), Err(Error::Dimension(_))));
        assert!(matches!(m.grad_params(&[1.0, 2.0, 3.0], &[1.0]), Err(Error::Dimension(_))));
        assert!(MlpModel::from_parts(vec![3, 2], vec![0.0; 7]).is_err());
        assert!(MlpModel::zeros(&[3]).is_err());
    }

    #[test]
    fn batch_rows_are_independent() {
        let m = MlpModel::glorot(&[3, 5, 5, 2], &mut rng::stream(7, 0)).unwrap();
        let rows = vec![vec![0.1, 0.2, 0.3], vec![-1.0, 0.5, 2.0]];
        let batch = m.forward_batch(&DenseMatrix::from_rows(&rows).unwrap()).unwrap();
        for (i, r) in rows.iter().enumerate() {
            let single = m.forward(r).unwrap();
            for (a, b) in single.iter().zip(batch.output().row(i)) {
                assert!((a - b).abs() < 1e-15);
            }
        }
    }
}
