use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Adam optimizer state with bias-corrected moment estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub step_count: u64,
    pub first_moment: Vec<f64>,
    pub second_moment: Vec<f64>,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    /// Fresh state with lr 1e-3, betas (0.9, 0.999), epsilon 1e-8.
    pub fn new(param_count: usize) -> Self {
        Self::with_lr(param_count, 1e-3)
    }

    pub fn with_lr(param_count: usize, learning_rate: f64) -> Self {
        AdamState {
            step_count: 0,
            first_moment: vec![0.0; param_count],
            second_moment: vec![0.0; param_count],
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != self.first_moment.len() || grads.len() != params.len() {
            return Err(Error::dim(format!(
                "adam state sized {}, params {}, grads {}",
                self.first_moment.len(),
                params.len(),
                grads.len()
            )));
        }
        self.step_count += 1;
        let t = self.step_count as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        for (((p, &g), m), v) in params
            .iter_mut()
            .zip(grads)
            .zip(&mut self.first_moment)
            .zip(&mut self.second_moment)
        {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *p -= self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params_and_counts_step() {
        let mut s = AdamState::new(3);
        let mut p = vec![1.0, -2.0, 0.5];
        s.step(&mut p, &[0.0; 3]).unwrap();
        assert_eq!(p, vec![1.0, -2.0, 0.5]);
        assert_eq!(s.step_count, 1);
    }

    #[test]
    fn first_step_scalar_hand_expansion() {
        // m = 0.1 g, v = 0.001 g²; m̂ = g, v̂ = g²; Δ = -lr g / (|g| + ε)
        let g = 0.37;
        let mut s = AdamState::with_lr(1, 0.01);
        let mut p = vec![2.0];
        s.step(&mut p, &[g]).unwrap();
        let expected = 2.0 - 0.01 * g / (g.abs() + 1e-8);
        assert!((p[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn zero_betas_give_normalized_step() {
        let mut s = AdamState::with_lr(2, 0.1);
        s.beta1 = 0.0;
        s.beta2 = 0.0;
        let mut p = vec![0.0, 0.0];
        for _ in 0..3 {
            s.step(&mut p, &[4.0, -0.25]).unwrap();
        }
        assert!((p[0] + 0.3).abs() < 1e-8);
        assert!((p[1] - 0.3).abs() < 1e-6);
    }

    #[test]
    fn size_mismatch() {
        let mut s = AdamState::new(2);
        assert!(s.step(&mut [0.0; 3], &[0.0; 3]).is_err());
    }
}
