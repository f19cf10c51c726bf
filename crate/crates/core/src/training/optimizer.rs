//! Stochastic gradient descent with first/second-moment adaptation
//! (exponential decays 0.9/0.999, epsilon 1e-8, bias correction).

use crate::encoder::{EncoderGrads, EncoderParams};

#[derive(Debug, Clone)]
pub struct Adam {
    learning_rate: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    step_count: u64,
    first_moment: Vec<f64>,
    second_moment: Vec<f64>,
}

impl Adam {
    pub fn new(learning_rate: f64, beta1: f64, beta2: f64, epsilon: f64, param_count: usize) -> Self {
        Adam {
            learning_rate,
            beta1,
            beta2,
            epsilon,
            step_count: 0,
            first_moment: vec![0.0; param_count],
            second_moment: vec![0.0; param_count],
        }
    }

    /// One parameter update. Segments are visited in checkpoint order so the
    /// moment buffers line up across calls.
    pub fn step(&mut self, params: &mut EncoderParams, grads: &EncoderGrads) {
        self.step_count += 1;
        let bias1 = 1.0 - self.beta1.powi(self.step_count as i32);
        let bias2 = 1.0 - self.beta2.powi(self.step_count as i32);

        let mut offset = 0;
        let grad_segments = grads.segments();
        for (seg_idx, param_seg) in params.segments_mut().into_iter().enumerate() {
            let grad_seg = grad_segments[seg_idx];
            for (k, p) in param_seg.iter_mut().enumerate() {
                let g = grad_seg[k];
                let m = &mut self.first_moment[offset + k];
                let v = &mut self.second_moment[offset + k];
                *m = self.beta1 * *m + (1.0 - self.beta1) * g;
                *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
                let m_hat = *m / bias1;
                let v_hat = *v / bias2;
                *p -= self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
            }
            offset += grad_seg.len();
        }
    }
}
