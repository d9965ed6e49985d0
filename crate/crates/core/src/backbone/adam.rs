use ndarray::{Array2, Zip};

use super::{Gradients, ModelParams};

/// First and second moment estimates plus the number of steps taken.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub first_moment: Vec<Array2<f64>>,
    pub second_moment: Vec<Array2<f64>>,
    pub step: u64,
}

impl AdamState {
    pub fn zeros_like(weights: &[Array2<f64>]) -> Self {
        let zeros: Vec<_> = weights.iter().map(|w| Array2::zeros(w.dim())).collect();
        Self {
            first_moment: zeros.clone(),
            second_moment: zeros,
            step: 0,
        }
    }
}

/// Bias-corrected Adam.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Adam {
    pub fn new(learning_rate: f64) -> Self {
        Self {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }

    pub fn step(&self, params: &mut ModelParams, grads: &Gradients) {
        let state = &mut params.adam;
        state.step += 1;
        let t = state.step as i32;
        let bias1 = 1.0 - self.beta1.powi(t);
        let bias2 = 1.0 - self.beta2.powi(t);
        for (((w, g), m), v) in params
            .weights
            .iter_mut()
            .zip(&grads.weights)
            .zip(&mut state.first_moment)
            .zip(&mut state.second_moment)
        {
            Zip::from(w).and(g).and(m).and(v).for_each(|w, &g, m, v| {
                *m = self.beta1 * *m + (1.0 - self.beta1) * g;
                *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
                let m_hat = *m / bias1;
                let v_hat = *v / bias2;
                *w -= self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
            });
        }
    }
}
